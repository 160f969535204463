"""Fragment-level scoring with partial credit for character overlap.

For predictions S and gold T::

    C(s, t, h) = |s ∩ t| / h  if label(s) == label(t) else 0
    P = (1/|S|) * sum over s in S, t in T of C(s, t, |s|)     (0 if S empty)
    R = (1/|T|) * sum over s in S, t in T of C(s, t, |t|)     (0 if T empty)

Only fragments of the same article are compared.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from propspan.spans import AnnotationSet, Fragment, LabelInventory, SpanError, overlap_length


def overlap_score(s: Fragment, t: Fragment, h: int) -> float:
    if h <= 0:
        raise SpanError(f"normalizer h must be positive, got {h}")
    inter = overlap_length(s, t)
    if s.label != t.label:
        return 0.0
    return inter / h


def f1_score(precision: float, recall: float) -> float:
    denom = precision + recall
    return 2.0 * precision * recall / denom if denom > 0 else 0.0


def _credits(S: Iterable[Fragment], T: Iterable[Fragment]) -> tuple[list[float], list[float], list[Fragment], list[Fragment]]:
    """Per-prediction precision credit and per-gold recall credit.

    Only same-article, same-label pairs can score, so pairs are taken within
    (article, label) buckets.
    """
    S = list(S)
    T = list(T)
    gold_groups: dict[tuple[str, str], list[int]] = {}
    for j, t in enumerate(T):
        gold_groups.setdefault((t.article_id, t.label), []).append(j)
    prec = [0.0] * len(S)
    rec = [0.0] * len(T)
    for i, s in enumerate(S):
        for j in gold_groups.get((s.article_id, s.label), ()):
            t = T[j]
            inter = overlap_length(s, t)
            if inter:
                prec[i] += inter / len(s)
                rec[j] += inter / len(t)
    return prec, rec, S, T


def precision_flc(S: Iterable[Fragment], T: Iterable[Fragment]) -> float:
    prec, _, S, _ = _credits(S, T)
    return sum(prec) / len(S) if S else 0.0


def recall_flc(S: Iterable[Fragment], T: Iterable[Fragment]) -> float:
    _, rec, _, T = _credits(S, T)
    return sum(rec) / len(T) if T else 0.0


@dataclass
class Scores:
    precision: float
    recall: float
    f1: float
    num_predicted: int
    num_gold: int

    def as_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "num_predicted": self.num_predicted,
            "num_gold": self.num_gold,
        }


@dataclass
class FlcReport:
    precision: float
    recall: float
    f1: float
    num_predicted: int
    num_gold: int
    per_technique: dict[str, Scores] = field(default_factory=dict)
    # fragments whose summed credit exceeds 1 (possible when gold or predictions overlap)
    over_credited_predictions: list[tuple[Fragment, float]] = field(default_factory=list)
    over_credited_gold: list[tuple[Fragment, float]] = field(default_factory=list)

    def as_dict(self) -> dict:
        def frag(f: Fragment, c: float) -> dict:
            return {"article_id": f.article_id, "label": f.label, "begin": f.begin, "end": f.end, "credit": c}

        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "num_predicted": self.num_predicted,
            "num_gold": self.num_gold,
            "per_technique": {k: v.as_dict() for k, v in self.per_technique.items()},
            "per_technique_note": "per-technique rows apply the overall formula to one label at a time",
            "diagnostics": {
                "over_credited_predictions": [frag(f, c) for f, c in self.over_credited_predictions],
                "over_credited_gold": [frag(f, c) for f, c in self.over_credited_gold],
            },
        }


def evaluate_flc(
    S: Iterable[Fragment], T: Iterable[Fragment], inventory: LabelInventory | None = None
) -> FlcReport:
    """Overall and per-technique scores.

    With a strict inventory, fragments with unknown labels raise
    :class:`SpanError`. Per-technique rows cover the inventory labels followed
    by any other label seen in the data.
    """
    S = list(S)
    T = list(T)
    if inventory is not None and inventory.strict:
        for f in S + T:
            if f.label not in inventory:
                raise SpanError(f"fragment {f.article_id}:{f.begin}-{f.end} has unknown technique {f.label!r}")

    prec, rec, _, _ = _credits(S, T)
    p = sum(prec) / len(S) if S else 0.0
    r = sum(rec) / len(T) if T else 0.0

    labels = list(inventory) if inventory is not None else []
    for f in S + T:
        if f.label not in labels:
            labels.append(f.label)

    per_technique = {}
    for label in labels:
        ps = [c for c, f in zip(prec, S) if f.label == label]
        rs = [c for c, f in zip(rec, T) if f.label == label]
        lp = sum(ps) / len(ps) if ps else 0.0
        lr = sum(rs) / len(rs) if rs else 0.0
        per_technique[label] = Scores(lp, lr, f1_score(lp, lr), len(ps), len(rs))

    eps = 1e-12
    return FlcReport(
        precision=p,
        recall=r,
        f1=f1_score(p, r),
        num_predicted=len(S),
        num_gold=len(T),
        per_technique=per_technique,
        over_credited_predictions=[(f, c) for f, c in zip(S, prec) if c > 1 + eps],
        over_credited_gold=[(f, c) for f, c in zip(T, rec) if c > 1 + eps],
    )
