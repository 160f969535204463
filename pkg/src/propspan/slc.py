"""Sentence-level binary scoring (positive class = contains propaganda)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from propspan.flc import f1_score


@dataclass
class SlcReport:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    tn: int
    fn: int

    def as_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "tp": self.tp,
            "fp": self.fp,
            "tn": self.tn,
            "fn": self.fn,
        }


def evaluate_slc(pred: Sequence[bool], gold: Sequence[bool]) -> SlcReport:
    if len(pred) != len(gold):
        raise ValueError(f"{len(pred)} predictions for {len(gold)} gold sentences")
    tp = fp = tn = fn = 0
    for p, g in zip(pred, gold):
        if p and g:
            tp += 1
        elif p:
            fp += 1
        elif g:
            fn += 1
        else:
            tn += 1
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return SlcReport(precision, recall, f1_score(precision, recall), tp, fp, tn, fn)


def all_propaganda_baseline(n: int) -> list[bool]:
    """Label every one of ``n`` sentences as propagandistic."""
    if n < 0:
        raise ValueError("sentence count must be non-negative")
    return [True] * n
