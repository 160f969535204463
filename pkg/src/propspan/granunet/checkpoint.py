"""Flat text checkpoints.

Layout, one record per line::

    propspan-granunet 1
    config <field> <value>
    meta positive_weight <float>
    label <technique>          # inventory order
    vocab <token>              # id order, starting at 1
    param <name> <dim>...      # followed by one line of row-major values

Floats are written with ``repr`` (shortest round-trip form), so reading a
checkpoint back reproduces every parameter bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from propspan.granunet.data import Vocabulary
from propspan.granunet.model import PARAM_NAMES, ConfigError, GranuConfig, GranuParams
from propspan.spans import LabelInventory

MAGIC = "propspan-granunet"
VERSION = 1


class CheckpointError(ValueError):
    pass


@dataclass
class Checkpoint:
    config: GranuConfig
    params: GranuParams
    vocab: Vocabulary
    inventory: LabelInventory
    positive_weight: float = 1.0


def _render(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dumps(ckpt: Checkpoint) -> str:
    lines = [f"{MAGIC} {VERSION}"]
    for f in fields(ckpt.config):
        lines.append(f"config {f.name} {_render(getattr(ckpt.config, f.name))}")
    lines.append(f"meta positive_weight {float(ckpt.positive_weight)!r}")
    lines.extend(f"label {name}" for name in ckpt.inventory)
    lines.extend(f"vocab {tok}" for tok in ckpt.vocab.tokens)
    for name, value in ckpt.params.items():
        dims = " ".join(str(d) for d in value.shape)
        lines.append(f"param {name} {dims}".rstrip())
        lines.append(" ".join(repr(float(x)) for x in value.reshape(-1)))
    return "\n".join(lines) + "\n"


def _config_value(name: str, raw: str):
    ints = {"vocab_size", "num_token_classes", "embed_dim", "seed", "epochs"}
    strs = {"wiring", "gate_activation"}
    if name in ints:
        return int(raw)
    if name in strs:
        return raw
    if name == "positive_class_weight" and raw == "auto":
        return raw
    return float(raw)


def loads(text: str) -> Checkpoint:
    lines = text.split("\n")
    if not lines or lines[0].split() != [MAGIC, str(VERSION)]:
        raise CheckpointError("not a propspan-granunet version 1 checkpoint")
    cfg: dict = {}
    labels: list[str] = []
    tokens: list[str] = []
    arrays: dict[str, np.ndarray] = {}
    pos_weight = 1.0
    i = 1
    while i < len(lines):
        line = lines[i]
        i += 1
        if not line:
            continue
        kind, _, rest = line.partition(" ")
        if kind == "config":
            key, _, raw = rest.partition(" ")
            cfg[key] = _config_value(key, raw)
        elif kind == "meta":
            key, _, raw = rest.partition(" ")
            if key == "positive_weight":
                pos_weight = float(raw)
        elif kind == "label":
            labels.append(rest)
        elif kind == "vocab":
            tokens.append(rest)
        elif kind == "param":
            head = rest.split()
            name, shape = head[0], tuple(int(d) for d in head[1:])
            if i >= len(lines):
                raise CheckpointError(f"parameter {name} has no values line")
            values = [float(x) for x in lines[i].split()]
            i += 1
            expected = int(np.prod(shape)) if shape else 1
            if len(values) != expected:
                raise CheckpointError(f"parameter {name}: expected {expected} values, got {len(values)}")
            arrays[name] = np.array(values, dtype=float).reshape(shape)
        else:
            raise CheckpointError(f"line {i}: unknown record {kind!r}")
    missing = [n for n in PARAM_NAMES if n not in arrays]
    if missing:
        raise CheckpointError(f"missing parameters: {missing}")
    try:
        config = GranuConfig(**cfg)
    except (TypeError, ConfigError) as exc:
        raise CheckpointError(f"invalid config: {exc}") from None
    return Checkpoint(
        config=config,
        params=GranuParams(**arrays),
        vocab=Vocabulary(tokens),
        inventory=LabelInventory(labels),
        positive_weight=pos_weight,
    )


def save(ckpt: Checkpoint, path: str | Path) -> None:
    Path(path).write_text(dumps(ckpt), encoding="utf-8")


def load(path: str | Path) -> Checkpoint:
    return loads(Path(path).read_text(encoding="utf-8"))
