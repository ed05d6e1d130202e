"""Pairwise distance computation shared by clustering and centroid prediction.

All arithmetic runs in 64-bit regardless of input dtype.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

METRICS = ("euclidean", "cosine")


def pairwise_distances(a: np.ndarray, b: np.ndarray, metric: str = "euclidean") -> np.ndarray:
    """Distance matrix of shape (len(a), len(b)) in float64.

    Cosine distance is 1 minus cosine similarity; zero-norm rows are treated
    as having unit norm, which makes them distance 1 from everything.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if metric == "euclidean":
        return cdist(a, b, metric="euclidean")
    if metric == "cosine":
        a_norm = np.linalg.norm(a, axis=1)
        b_norm = np.linalg.norm(b, axis=1)
        a_unit = a / np.where(a_norm > 0.0, a_norm, 1.0)[:, None]
        b_unit = b / np.where(b_norm > 0.0, b_norm, 1.0)[:, None]
        return 1.0 - a_unit @ b_unit.T
    raise ValueError(f"unknown metric {metric!r}, expected one of {METRICS}")


def check_finite(points: np.ndarray, what: str = "input") -> np.ndarray:
    """Return ``points`` as a float64 array, rejecting NaN and infinity."""
    arr = np.asarray(points, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} contains non-finite values")
    return arr
