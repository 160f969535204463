"""Two-granularity network: sentence head, token head, and the wirings between them.

Shapes (n tokens, d embedding dim, C token classes)::

    X  = E[ids]                 (n, d)   token vectors
    h  = mean(X)                (d,)     sentence vector
    o1 = h @ W1 + b1            (2,)     sentence outputs [negative, positive]
    u  = X @ W2 + b2            (n, C)   raw token outputs

    independent: h comes from a separate embedding table, z = u
    joint:       z = u
    granu:       z = [o1 broadcast, u] @ W12 + b12
    multigran:   a = o1 @ Wg + bg, w = act(a), z = w * u

The sentence loss is elementwise sigmoid cross-entropy over both sentence
outputs; the token loss is the mean softmax cross-entropy over tokens; the
total is ``alpha * L1 + (1 - alpha) * L2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Sequence

import numpy as np

WIRINGS = ("independent", "joint", "granu", "multigran")
GATE_ACTIVATIONS = ("relu", "sigmoid")
PARAM_NAMES = (
    "embedding",
    "sentence_embedding",
    "sent_w",
    "sent_b",
    "token_w",
    "token_b",
    "gate_w",
    "gate_b",
    "concat_w",
    "concat_b",
)


class ConfigError(ValueError):
    pass


@dataclass
class GranuConfig:
    vocab_size: int
    num_token_classes: int
    embed_dim: int = 16
    wiring: str = "multigran"
    gate_activation: str = "sigmoid"
    alpha: float = 0.9
    learning_rate: float = 0.5
    seed: int = 0
    epochs: int = 500
    positive_class_weight: float | str = "auto"
    init_scale: float = 0.1
    gate_bias_init: float = 1.0

    def __post_init__(self):
        if self.vocab_size < 1:
            raise ConfigError("vocab_size must be positive")
        if self.embed_dim < 1:
            raise ConfigError("embed_dim must be positive")
        if self.num_token_classes < 2:
            raise ConfigError("num_token_classes must be at least 2")
        if self.wiring not in WIRINGS:
            raise ConfigError(f"wiring must be one of {WIRINGS}, got {self.wiring!r}")
        if self.gate_activation not in GATE_ACTIVATIONS:
            raise ConfigError(f"gate_activation must be one of {GATE_ACTIVATIONS}, got {self.gate_activation!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be positive")
        if self.epochs < 1:
            raise ConfigError("epochs must be positive")
        pcw = self.positive_class_weight
        if pcw != "auto" and not (isinstance(pcw, (int, float)) and pcw > 0):
            raise ConfigError(f"positive_class_weight must be 'auto' or a positive number, got {pcw!r}")

    def replace(self, **changes) -> "GranuConfig":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return GranuConfig(**values)


@dataclass
class GranuParams:
    embedding: np.ndarray
    sentence_embedding: np.ndarray
    sent_w: np.ndarray
    sent_b: np.ndarray
    token_w: np.ndarray
    token_b: np.ndarray
    gate_w: np.ndarray
    gate_b: np.ndarray
    concat_w: np.ndarray
    concat_b: np.ndarray

    @classmethod
    def init(cls, config: GranuConfig, rng: np.random.Generator | None = None) -> "GranuParams":
        rng = rng if rng is not None else np.random.default_rng(config.seed)
        V, d, C = config.vocab_size, config.embed_dim, config.num_token_classes
        s = config.init_scale
        return cls(
            embedding=rng.normal(0.0, s, (V, d)),
            sentence_embedding=rng.normal(0.0, s, (V, d)),
            sent_w=rng.normal(0.0, s, (d, 2)),
            sent_b=np.zeros(2),
            token_w=rng.normal(0.0, s, (d, C)),
            token_b=np.zeros(C),
            gate_w=rng.normal(0.0, s, (2,)),
            gate_b=np.array(float(config.gate_bias_init)),
            concat_w=rng.normal(0.0, s, (2 + C, C)),
            concat_b=np.zeros(C),
        )

    @classmethod
    def zeros_like(cls, other: "GranuParams") -> "GranuParams":
        return cls(**{k: np.zeros_like(v) for k, v in other.items()})

    def items(self):
        return [(name, getattr(self, name)) for name in PARAM_NAMES]

    def copy(self) -> "GranuParams":
        return GranuParams(**{k: v.copy() for k, v in self.items()})

    def axpy(self, scale: float, other: "GranuParams") -> None:
        """In place ``self += scale * other``."""
        for name, value in self.items():
            value += scale * getattr(other, name)


@dataclass
class Example:
    token_ids: Sequence[int]
    token_labels: Sequence[int]
    sentence_label: bool
    article_id: str | None = None
    token_spans: Sequence[tuple[int, int]] | None = None

    def __post_init__(self):
        if len(self.token_ids) != len(self.token_labels):
            raise ValueError("token_ids and token_labels differ in length")
        if self.token_spans is not None and len(self.token_spans) != len(self.token_ids):
            raise ValueError("token_spans and token_ids differ in length")


@dataclass
class ForwardTrace:
    wiring: str
    o1: np.ndarray                  # (2,) sentence outputs
    gate: float                     # w; 1.0 outside multigran
    gate_pre: float                 # a; 0.0 outside multigran
    logits: np.ndarray              # (n, C) token outputs after wiring
    raw_token: np.ndarray           # (n, C) L_g2 outputs before gating / concat
    token_ids: np.ndarray
    token_vecs: np.ndarray
    sentence_vec: np.ndarray
    concat_in: np.ndarray | None = None


@dataclass
class LossParts:
    total: float
    sentence: float
    token: float


def sigmoid(x):
    # split by sign so large |x| never overflows exp
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def log_sigmoid(x):
    x = np.asarray(x, dtype=float)
    return np.minimum(x, 0.0) - np.log1p(np.exp(-np.abs(x)))


def softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=-1, keepdims=True)
    ez = np.exp(shifted)
    return ez / ez.sum(axis=-1, keepdims=True)


def log_softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def encode(token_ids: Sequence[int], table: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Embedding lookup and mean pooling."""
    ids = np.asarray(token_ids, dtype=np.int64)
    if ids.ndim != 1 or ids.size == 0:
        raise ValueError("token sequence must be a non-empty 1-d sequence")
    if ids.min() < 0 or ids.max() >= table.shape[0]:
        raise ValueError(f"token id out of range [0, {table.shape[0]})")
    vecs = table[ids]
    return vecs, vecs.mean(axis=0)


def forward(example: Example, params: GranuParams, config: GranuConfig) -> ForwardTrace:
    ids = np.asarray(example.token_ids, dtype=np.int64)
    token_vecs, mean_vec = encode(ids, params.embedding)
    if config.wiring == "independent":
        _, sentence_vec = encode(ids, params.sentence_embedding)
    else:
        sentence_vec = mean_vec
    o1 = sentence_vec @ params.sent_w + params.sent_b
    raw = token_vecs @ params.token_w + params.token_b

    gate, gate_pre, concat_in = 1.0, 0.0, None
    if config.wiring in ("independent", "joint"):
        logits = raw
    elif config.wiring == "granu":
        concat_in = np.concatenate([np.broadcast_to(o1, (len(ids), 2)), raw], axis=1)
        logits = concat_in @ params.concat_w + params.concat_b
    else:
        gate_pre = float(o1 @ params.gate_w + params.gate_b)
        if config.gate_activation == "relu":
            gate = max(gate_pre, 0.0)
        else:
            gate = float(sigmoid(gate_pre))
        logits = gate * raw
    return ForwardTrace(
        wiring=config.wiring,
        o1=o1,
        gate=gate,
        gate_pre=gate_pre,
        logits=logits,
        raw_token=raw,
        token_ids=ids,
        token_vecs=token_vecs,
        sentence_vec=sentence_vec,
        concat_in=concat_in,
    )


def sentence_targets(label: bool) -> np.ndarray:
    return np.array([0.0, 1.0]) if label else np.array([1.0, 0.0])


def loss(
    trace: ForwardTrace,
    example: Example,
    config: GranuConfig,
    positive_weight: float = 1.0,
    alpha: float | None = None,
) -> LossParts:
    """Joint loss for one example; ``alpha`` overrides ``config.alpha``."""
    a = config.alpha if alpha is None else alpha
    y = sentence_targets(example.sentence_label)
    weight = positive_weight if example.sentence_label else 1.0
    bce = -(y * log_sigmoid(trace.o1) + (1.0 - y) * log_sigmoid(-trace.o1))
    l1 = float(weight * bce.mean())
    labels = np.asarray(example.token_labels, dtype=np.int64)
    logp = log_softmax(trace.logits)
    l2 = float(-logp[np.arange(len(labels)), labels].mean())
    return LossParts(total=a * l1 + (1.0 - a) * l2, sentence=l1, token=l2)


def backward(
    trace: ForwardTrace,
    example: Example,
    params: GranuParams,
    config: GranuConfig,
    positive_weight: float = 1.0,
) -> GranuParams:
    """Exact gradient of the total loss with respect to every parameter."""
    grads = GranuParams.zeros_like(params)
    a = config.alpha
    n = len(trace.token_ids)
    labels = np.asarray(example.token_labels, dtype=np.int64)

    # token loss: mean softmax cross-entropy
    dz = softmax(trace.logits)
    dz[np.arange(n), labels] -= 1.0
    dz *= (1.0 - a) / n

    # sentence loss: weighted elementwise sigmoid cross-entropy, mean over 2 outputs
    y = sentence_targets(example.sentence_label)
    weight = positive_weight if example.sentence_label else 1.0
    do1 = a * weight * (sigmoid(trace.o1) - y) / 2.0

    if trace.wiring in ("independent", "joint"):
        du = dz
    elif trace.wiring == "granu":
        grads.concat_w = trace.concat_in.T @ dz
        grads.concat_b = dz.sum(axis=0)
        dq = dz @ params.concat_w.T
        do1 = do1 + dq[:, :2].sum(axis=0)
        du = dq[:, 2:]
    else:
        du = trace.gate * dz
        dgate = float((dz * trace.raw_token).sum())
        if config.gate_activation == "relu":
            dpre = dgate if trace.gate_pre > 0 else 0.0
        else:
            dpre = dgate * trace.gate * (1.0 - trace.gate)
        grads.gate_w = dpre * trace.o1
        grads.gate_b = np.array(dpre)
        do1 = do1 + dpre * params.gate_w

    grads.token_w = trace.token_vecs.T @ du
    grads.token_b = du.sum(axis=0)
    d_token_vecs = du @ params.token_w.T

    grads.sent_w = np.outer(trace.sentence_vec, do1)
    grads.sent_b = do1.copy()
    d_sentence_vec = params.sent_w @ do1

    np.add.at(grads.embedding, trace.token_ids, d_token_vecs)
    pooled = np.broadcast_to(d_sentence_vec / n, (n, d_sentence_vec.shape[0]))
    table = grads.sentence_embedding if trace.wiring == "independent" else grads.embedding
    np.add.at(table, trace.token_ids, pooled)
    return grads


def total_loss(example: Example, params: GranuParams, config: GranuConfig, positive_weight: float = 1.0) -> float:
    return loss(forward(example, params, config), example, config, positive_weight).total
