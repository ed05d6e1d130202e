"""Seeded synthetic stores for fixtures and end-to-end checks.

Each generator emits four datasets (train/test split per domain) whose class
sets are disjoint between the A and B halves, so the produced stores pass
scenario validation out of the box.
"""

from __future__ import annotations

import numpy as np

from .store import EmbeddingStore, RowMeta


def two_domain_store(
    n_dims: int = 32,
    classes_per_domain: int = 20,
    samples_per_class: int = 25,
    center_distance: float = 10.0,
    domain_sigma: float = 1.0,
    class_sigma: float = 0.1,
    seed: int = 0,
) -> EmbeddingStore:
    """Two Gaussian domains, each made of class sub-blobs.

    Domain centers sit ``center_distance * domain_sigma`` apart along a
    random direction, where ``domain_sigma`` is the typical distance (norm)
    of a class center from its domain center; per-coordinate scales are
    divided by sqrt(n_dims) so the sigmas read as radii regardless of the
    dimensionality. Datasets: SynthID_A / SynthOOD_A hold the first half of
    each domain's classes, SynthID_B / SynthOOD_B the second half.
    """
    rng = np.random.default_rng(seed)
    direction = rng.normal(size=n_dims)
    direction /= np.linalg.norm(direction)
    centers = {
        "id": np.zeros(n_dims),
        "ood": direction * center_distance * domain_sigma,
    }
    domain_scale = domain_sigma / np.sqrt(n_dims)
    class_scale = class_sigma / np.sqrt(n_dims)

    features, rows = [], []
    for domain, center in centers.items():
        class_centers = center + rng.normal(scale=domain_scale, size=(classes_per_domain, n_dims))
        for c, class_center in enumerate(class_centers):
            half = "A" if c < classes_per_domain // 2 else "B"
            dataset = f"Synth{'ID' if domain == 'id' else 'OOD'}_{half}"
            samples = class_center + rng.normal(scale=class_scale, size=(samples_per_class, n_dims))
            for s, sample in enumerate(samples):
                rows.append(
                    RowMeta(f"{domain}_c{c:02d}_s{s:03d}", f"{domain}_c{c:02d}", dataset)
                )
                features.append(sample)
    return EmbeddingStore(np.array(features, dtype=np.float32), rows)


def xor_store(
    classes_per_blob: int = 4,
    samples_per_class: int = 25,
    arm: float = 4.0,
    blob_sigma: float = 0.5,
    seed: int = 0,
) -> EmbeddingStore:
    """2-D checkerboard: in-domain on one diagonal, out-of-domain on the other.

    No single affine boundary separates the domains, so a linear head stays
    near chance while a hidden layer can solve it. Classes are split between
    the A (train) and B (test) datasets within every blob.
    """
    rng = np.random.default_rng(seed)
    blobs = {
        "id": [np.array([0.0, 0.0]), np.array([arm, arm])],
        "ood": [np.array([arm, 0.0]), np.array([0.0, arm])],
    }
    features, rows = [], []
    for domain, corners in blobs.items():
        for b, corner in enumerate(corners):
            for c in range(classes_per_blob):
                half = "A" if c < classes_per_blob // 2 else "B"
                dataset = f"Xor{'ID' if domain == 'id' else 'OOD'}_{half}"
                label = f"{domain}_b{b}_c{c}"
                samples = corner + rng.normal(scale=blob_sigma, size=(samples_per_class, 2))
                for s, sample in enumerate(samples):
                    rows.append(RowMeta(f"{label}_s{s:03d}", label, dataset))
                    features.append(sample)
    return EmbeddingStore(np.array(features, dtype=np.float32), rows)
