"""Plain per-example gradient descent and prediction."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from propspan.corpus import Article
from propspan.flc import evaluate_flc
from propspan.granunet.data import Vocabulary, tokenize
from propspan.granunet.model import (
    Example,
    GranuConfig,
    GranuParams,
    backward,
    forward,
    loss,
)
from propspan.slc import evaluate_slc
from propspan.spans import AnnotationSet, LabelInventory, fragment_from_token_run

logger = logging.getLogger(__name__)


@dataclass
class EpochLog:
    epoch: int
    sentence_loss: float
    token_loss: float
    total_loss: float
    slc_f1: float
    flc_f1: float

    def as_dict(self) -> dict:
        return {
            "epoch": self.epoch,
            "sentence_loss": self.sentence_loss,
            "token_loss": self.token_loss,
            "total_loss": self.total_loss,
            "slc_f1": self.slc_f1,
            "flc_f1": self.flc_f1,
        }


@dataclass
class TrainResult:
    params: GranuParams
    config: GranuConfig
    positive_weight: float
    log: list[EpochLog] = field(default_factory=list)


def auto_positive_weight(examples: Sequence[Example]) -> float:
    """Negative-to-positive sentence ratio; 1.0 when either class is absent."""
    pos = sum(1 for ex in examples if ex.sentence_label)
    neg = len(examples) - pos
    if pos == 0 or neg == 0:
        return 1.0
    return neg / pos


def resolve_positive_weight(config: GranuConfig, examples: Sequence[Example]) -> float:
    if config.positive_class_weight == "auto":
        return auto_positive_weight(examples)
    return float(config.positive_class_weight)


def predict_example(example: Example, params: GranuParams, config: GranuConfig) -> tuple[bool, list[int]]:
    """Sentence decision (positive sigmoid output > 0.5) and argmax token classes.

    ``np.argmax`` returns the first maximum, so ties resolve toward class 0.
    """
    trace = forward(example, params, config)
    return bool(trace.o1[1] > 0.0), trace.logits.argmax(axis=1).tolist()


def _spans(ex: Example, index: int) -> tuple[str, list[tuple[int, int]]]:
    if ex.token_spans is not None and ex.article_id is not None:
        return ex.article_id, list(ex.token_spans)
    # unit pseudo-offsets, one article per example
    return f"example-{index}", [(i, i + 1) for i in range(len(ex.token_ids))]


def _class_names(classes: Sequence[int]) -> list[str]:
    return ["none" if c == 0 else f"class-{c}" for c in classes]


def training_metrics(examples: Sequence[Example], params: GranuParams, config: GranuConfig) -> tuple[float, float]:
    """Train-set SLC F1 and token-run FLC F1."""
    pred_s, gold_s = [], []
    pred_frags, gold_frags = [], []
    for i, ex in enumerate(examples):
        s, classes = predict_example(ex, params, config)
        pred_s.append(s)
        gold_s.append(bool(ex.sentence_label))
        art, spans = _spans(ex, i)
        pred_frags.extend(fragment_from_token_run(art, spans, _class_names(classes)))
        gold_frags.extend(fragment_from_token_run(art, spans, _class_names(ex.token_labels)))
    slc = evaluate_slc(pred_s, gold_s).f1
    flc = evaluate_flc(pred_frags, gold_frags).f1
    return slc, flc


def train(examples: Sequence[Example], config: GranuConfig, log_every: int = 0) -> TrainResult:
    """Shuffled per-example gradient descent for ``config.epochs`` epochs.

    Everything random derives from ``config.seed``, so reruns are bitwise
    identical.
    """
    examples = list(examples)
    if not examples:
        raise ValueError("cannot train on an empty corpus")
    rng = np.random.default_rng(config.seed)
    params = GranuParams.init(config, rng)
    pos_weight = resolve_positive_weight(config, examples)
    result = TrainResult(params=params, config=config, positive_weight=pos_weight)
    lr = config.learning_rate
    for epoch in range(1, config.epochs + 1):
        for idx in rng.permutation(len(examples)):
            ex = examples[idx]
            trace = forward(ex, params, config)
            grads = backward(trace, ex, params, config, pos_weight)
            params.axpy(-lr, grads)

        l1 = l2 = lt = 0.0
        for ex in examples:
            parts = loss(forward(ex, params, config), ex, config, pos_weight)
            l1 += parts.sentence
            l2 += parts.token
            lt += parts.total
        n = len(examples)
        slc_f1, flc_f1 = training_metrics(examples, params, config)
        entry = EpochLog(epoch, l1 / n, l2 / n, lt / n, slc_f1, flc_f1)
        result.log.append(entry)
        if log_every and epoch % log_every == 0:
            logger.info(
                "epoch %d  loss %.4f (sent %.4f, tok %.4f)  slc F1 %.4f  flc F1 %.4f",
                epoch, entry.total_loss, entry.sentence_loss, entry.token_loss, slc_f1, flc_f1,
            )
    return result


def predict(
    article: Article,
    params: GranuParams,
    config: GranuConfig,
    vocab: Vocabulary,
    inventory: LabelInventory,
) -> tuple[list[bool], AnnotationSet]:
    """Per-sentence SLC decisions and FLC fragments for one article.

    Sentences without tokens are predicted negative with no fragments.
    """
    sentence_preds = []
    fragments = AnnotationSet()
    for sb, se in article.sentence_index:
        tokens = tokenize(article.text, sb, se)
        if not tokens:
            sentence_preds.append(False)
            continue
        ex = Example([vocab.id(t) for t, _, _ in tokens], [0] * len(tokens), False)
        positive, classes = predict_example(ex, params, config)
        sentence_preds.append(positive)
        names = [inventory.class_name(c) for c in classes]
        fragments = fragments + fragment_from_token_run(
            article.article_id, [(b, e) for _, b, e in tokens], names
        )
    return sentence_preds, fragments
