"""First-neighbor clustering hierarchy.

Level 0 groups samples into the connected components of the first-neighbor
graph: sample i links to j when j is i's nearest other sample, when i is j's
nearest other sample, or when both share the same nearest sample. Coarser
levels repeat the construction on cluster centroids until everything has
merged into a single cluster, so the result is a hierarchy of partitions with
strictly decreasing cluster counts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distances import check_finite, pairwise_distances

_CHUNK = 2048  # rows per distance-matrix block, bounds peak memory


@dataclass(frozen=True)
class FirstNeighborTable:
    """neighbor[i] is the index of sample i's nearest other sample."""

    neighbor: np.ndarray

    def __post_init__(self):
        neighbor = np.asarray(self.neighbor, dtype=np.int64)
        object.__setattr__(self, "neighbor", neighbor)
        n = len(neighbor)
        if n and (neighbor == np.arange(n)).any():
            raise ValueError("a sample may not be its own first neighbor")
        if n and (neighbor.min() < 0 or neighbor.max() >= n):
            raise ValueError("first-neighbor index out of range")


@dataclass(frozen=True)
class Partition:
    """Complete assignment of samples to clusters 0..k-1 with their centroids."""

    assignment: np.ndarray  # int64, one cluster id per sample
    k: int
    centroids: np.ndarray  # (k, n_dims) float64 arithmetic means

    def __post_init__(self):
        assignment = np.asarray(self.assignment, dtype=np.int64)
        centroids = np.asarray(self.centroids, dtype=np.float64)
        object.__setattr__(self, "assignment", assignment)
        object.__setattr__(self, "centroids", centroids)
        if set(np.unique(assignment)) != set(range(self.k)):
            raise ValueError(f"assignment must use every cluster id in 0..{self.k - 1}")
        if centroids.shape[0] != self.k:
            raise ValueError(f"expected {self.k} centroids, got {centroids.shape[0]}")

    def members(self, cluster: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == cluster)


@dataclass(frozen=True)
class PartitionHierarchy:
    """Partitions ordered fine to coarse; k strictly decreases along the list."""

    partitions: tuple[Partition, ...]

    def __post_init__(self):
        ks = self.k_sequence
        if any(a <= b for a, b in zip(ks, ks[1:])):
            raise ValueError(f"cluster counts must strictly decrease, got {ks}")
        if ks and ks[-1] < 1:
            raise ValueError("final partition must have at least one cluster")

    @property
    def k_sequence(self) -> tuple[int, ...]:
        return tuple(p.k for p in self.partitions)


def first_neighbors(points: np.ndarray, metric: str = "euclidean") -> FirstNeighborTable:
    """Nearest other sample for every row, ties broken toward the smallest index.

    Requires at least two rows and finite values. Duplicate points are legal;
    zero distance is a valid minimum.
    """
    pts = check_finite(points, "points")
    n = pts.shape[0]
    if n < 2:
        raise ValueError(f"need at least 2 points, got {n}")
    neighbor = np.empty(n, dtype=np.int64)
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        dist = pairwise_distances(pts[start:stop], pts, metric)
        dist[np.arange(stop - start), np.arange(start, stop)] = np.inf
        # argmin returns the first occurrence, which is the smallest index
        neighbor[start:stop] = dist.argmin(axis=1)
    return FirstNeighborTable(neighbor)


def adjacency_partition(fn_table: FirstNeighborTable, points: np.ndarray) -> Partition:
    """Connected components of the first-neighbor graph.

    The link conditions (j is i's neighbor, i is j's neighbor, shared
    neighbor) all collapse onto the undirected edge set {i - neighbor[i]}:
    two samples sharing a neighbor are already connected through it. Cluster
    ids are assigned in order of each component's smallest sample index.
    ``points`` supplies the member coordinates for the centroids.
    """
    neighbor = fn_table.neighbor
    n = len(neighbor)
    parent = np.arange(n)

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for i in range(n):
        ri, rj = find(i), find(int(neighbor[i]))
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    assignment = np.empty(n, dtype=np.int64)
    label_of: dict[int, int] = {}
    for i in range(n):
        root = find(i)
        if root not in label_of:
            label_of[root] = len(label_of)
        assignment[i] = label_of[root]
    k = len(label_of)
    return Partition(assignment, k, _centroids(np.asarray(points, dtype=np.float64), assignment, k))


def finch(points: np.ndarray, metric: str = "euclidean") -> PartitionHierarchy:
    """Full partition hierarchy, from the first-neighbor level down to one cluster.

    Each coarser level clusters the previous level's centroids with the same
    first-neighbor construction and relabels samples through the merge. The
    loop ends once a single cluster is reached (that partition is included)
    or, as a termination guard, if a step fails to reduce the cluster count.
    """
    pts = check_finite(points, "points")
    if pts.shape[0] < 2:
        raise ValueError(f"need at least 2 points, got {pts.shape[0]}")
    level = adjacency_partition(first_neighbors(pts, metric), pts)
    levels = [level]
    while level.k > 1:
        meta = adjacency_partition(first_neighbors(level.centroids, metric), level.centroids)
        if meta.k >= level.k:
            break
        assignment = meta.assignment[level.assignment]
        level = Partition(assignment, meta.k, _centroids(pts, assignment, meta.k))
        levels.append(level)
    return PartitionHierarchy(tuple(levels))


def select_partition(hierarchy: PartitionHierarchy) -> Partition:
    """The partition with the most clusters (the finest level)."""
    if not hierarchy.partitions:
        raise ValueError("empty partition hierarchy")
    return max(hierarchy.partitions, key=lambda p: p.k)


def _centroids(points: np.ndarray, assignment: np.ndarray, k: int) -> np.ndarray:
    sums = np.zeros((k, points.shape[1]), dtype=np.float64)
    np.add.at(sums, assignment, points)
    counts = np.bincount(assignment, minlength=k).astype(np.float64)
    return sums / counts[:, None]
