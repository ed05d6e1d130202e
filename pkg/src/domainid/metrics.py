"""Confusion counting and balanced accuracy over binary domain decisions.

Convention: label 1 is in-domain (positive), label 0 is out-of-domain
(negative).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ConfusionCounts:
    """tp and tn are correct decisions; p and n are the test totals per side."""

    tp: int
    tn: int
    p: int
    n: int

    def __post_init__(self):
        if not 0 <= self.tp <= self.p:
            raise ValueError(f"tp={self.tp} outside 0..p={self.p}")
        if not 0 <= self.tn <= self.n:
            raise ValueError(f"tn={self.tn} outside 0..n={self.n}")

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp, self.tn + other.tn, self.p + other.p, self.n + other.n
        )


def count_confusion(predictions, truths) -> ConfusionCounts:
    """Tally binary predictions against binary truths.

    Both arrays must be the same non-zero length and contain only 0s and 1s.
    """
    pred = np.asarray(predictions)
    truth = np.asarray(truths)
    if pred.shape != truth.shape:
        raise ValueError(f"length mismatch: {pred.shape} predictions vs {truth.shape} truths")
    if pred.size == 0:
        raise ValueError("empty input")
    for name, arr in (("predictions", pred), ("truths", truth)):
        if not np.isin(arr, (0, 1)).all():
            raise ValueError(f"{name} must contain only 0 and 1")
    p = int((truth == 1).sum())
    n = int((truth == 0).sum())
    tp = int(((pred == 1) & (truth == 1)).sum())
    tn = int(((pred == 0) & (truth == 0)).sum())
    return ConfusionCounts(tp=tp, tn=tn, p=p, n=n)


def baccu(c: ConfusionCounts) -> float:
    """Balanced accuracy: the mean of the per-side correct rates.

    Requires samples on both sides; a missing side leaves one of the two
    rates undefined and raises rather than silently scoring 0.
    """
    if c.p == 0 or c.n == 0:
        raise ValueError(f"balanced accuracy undefined for p={c.p}, n={c.n}")
    return (c.tp / c.p + c.tn / c.n) / 2.0
