"""Binary domain deciders over feature vectors: 1 means in-domain, 0 out-of-domain.

Three families are provided. Centroid models keep one mean per training
domain (``fit_ncm``) or one mean per cluster found by the first-neighbor
hierarchy within each domain (``fit_ncm_finch``) and decide by nearest
centroid. Linear heads are trained by mini-batch gradient descent on a
binary cross-entropy loss: a single affine map (``fc1``) or one hidden layer
with swish activation (``fc2``).

Fitted models serialize to the "OWRM1" binary container (little-endian):

    bytes 0..4   magic ``4F 57 52 4D 31`` ("OWRM1")
    byte  5      u8 model kind: 1 centroid, 2 fc1, 3 fc2
    centroid:    u32 m, u32 n_dims, m u8 domain tags (1 ID / 0 OOD),
                 m * n_dims f64 centroids row-major
    fc1:         u32 n_dims, f64 threshold, n_dims f64 weights, f64 bias
    fc2:         u32 n_dims, u32 hidden, f64 threshold,
                 n_dims * hidden f64 first-layer weights row-major,
                 hidden f64 first-layer biases, hidden f64 output weights,
                 f64 output bias
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit as sigmoid

from .distances import check_finite, pairwise_distances
from .finch import finch, select_partition
from .store import EmbeddingStore

ID = 1
OOD = 0

MODEL_MAGIC = b"OWRM1"
_KIND_CENTROID = 1
_KIND_FC1 = 2
_KIND_FC2 = 3


class ModelFormatError(ValueError):
    """Raised when a serialized model violates the container contract."""


class TrainingError(RuntimeError):
    """Raised when training produces a non-finite loss."""


@dataclass(frozen=True)
class CentroidModel:
    """Labeled centroids; the decision is the domain of the nearest one."""

    centroids: np.ndarray  # (m, n_dims) float64
    domain_of: np.ndarray  # (m,) values from {ID, OOD}

    def __post_init__(self):
        centroids = np.asarray(self.centroids, dtype=np.float64)
        domain_of = np.asarray(self.domain_of, dtype=np.int8)
        object.__setattr__(self, "centroids", centroids)
        object.__setattr__(self, "domain_of", domain_of)
        if centroids.ndim != 2 or len(domain_of) != centroids.shape[0]:
            raise ValueError("centroid matrix and domain tags disagree in length")
        if not np.isin(domain_of, (ID, OOD)).all():
            raise ValueError("domain tags must be ID (1) or OOD (0)")
        if not (domain_of == ID).any() or not (domain_of == OOD).any():
            raise ValueError("need at least one ID and one OOD centroid")
        if not np.isfinite(centroids).all():
            raise ValueError("centroids contain non-finite values")

    @property
    def n_dims(self) -> int:
        return self.centroids.shape[1]


@dataclass
class TrainConfig:
    step_size: float = 0.01
    epochs: int = 100
    batch_size: int = 64
    seed: int = 0
    l2_penalty: float = 0.0
    class_weighting: str = "balanced"  # "none" or "balanced"

    def __post_init__(self):
        if self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.l2_penalty < 0:
            raise ValueError("l2_penalty must be non-negative")
        if self.class_weighting not in ("none", "balanced"):
            raise ValueError(f"unknown class_weighting {self.class_weighting!r}")


@dataclass
class LinearHead:
    """Affine decision head; ``fc2`` adds one swish hidden layer.

    For fc1, w1 has shape (n_dims,) and b1 is the scalar bias; w2 and b2 are
    unused. For fc2, w1 is (n_dims, hidden), b1 is (hidden,), w2 is (hidden,)
    and b2 is the output bias.
    """

    variant: str  # "fc1" or "fc2"
    w1: np.ndarray
    b1: np.ndarray | float
    w2: np.ndarray | None = None
    b2: float | None = None
    threshold: float = 0.5

    def __post_init__(self):
        if self.variant not in ("fc1", "fc2"):
            raise ValueError(f"unknown head variant {self.variant!r}")
        parts = [self.w1, self.b1] if self.variant == "fc1" else [self.w1, self.b1, self.w2, self.b2]
        for part in parts:
            if part is None or not np.isfinite(part).all():
                raise ValueError("head parameters must be finite")

    @property
    def n_dims(self) -> int:
        return self.w1.shape[0]

    def logits(self, queries: np.ndarray) -> np.ndarray:
        """Pre-sigmoid scores for a (n, n_dims) batch, in float64."""
        x = np.asarray(queries, dtype=np.float64)
        if self.variant == "fc1":
            return x @ self.w1 + self.b1
        hidden = swish(x @ self.w1 + self.b1)
        return hidden @ self.w2 + self.b2


def swish(x):
    """x * sigmoid(x), elementwise."""
    return x * sigmoid(x)


def fit_ncm(id_store: EmbeddingStore, ood_store: EmbeddingStore) -> CentroidModel:
    """One centroid per domain: the arithmetic mean of each training store."""
    _check_train_stores(id_store, ood_store, min_rows=1)
    id_mean = id_store.features.astype(np.float64).mean(axis=0)
    ood_mean = ood_store.features.astype(np.float64).mean(axis=0)
    return CentroidModel(np.stack([id_mean, ood_mean]), np.array([ID, OOD], dtype=np.int8))


def fit_ncm_finch(
    id_store: EmbeddingStore, ood_store: EmbeddingStore, metric: str = "euclidean"
) -> CentroidModel:
    """Cluster each domain independently and keep every cluster mean as a centroid.

    Each store is clustered with the first-neighbor hierarchy and the
    partition with the most clusters is kept, in-domain clusters first.
    """
    _check_train_stores(id_store, ood_store, min_rows=2)
    id_part = select_partition(finch(id_store.features, metric))
    ood_part = select_partition(finch(ood_store.features, metric))
    centroids = np.vstack([id_part.centroids, ood_part.centroids])
    tags = np.concatenate(
        [np.full(id_part.k, ID, dtype=np.int8), np.full(ood_part.k, OOD, dtype=np.int8)]
    )
    return CentroidModel(centroids, tags)


def predict_centroid(model: CentroidModel, query: np.ndarray, metric: str = "euclidean") -> int:
    """1 when the nearest centroid is in-domain; distance ties go out-of-domain."""
    q = check_finite(query, "query")
    if q.ndim != 1 or q.shape[0] != model.n_dims:
        raise ValueError(f"query has shape {q.shape}, model expects ({model.n_dims},)")
    return int(predict_centroid_batch(model, q[None, :], metric)[0])


def predict_centroid_batch(
    model: CentroidModel, queries: np.ndarray, metric: str = "euclidean"
) -> np.ndarray:
    """Vectorized nearest-centroid decisions for a (n, n_dims) batch."""
    q = check_finite(queries, "queries")
    if q.ndim != 2 or q.shape[1] != model.n_dims:
        raise ValueError(f"queries have shape {q.shape}, model expects (n, {model.n_dims})")
    dist = pairwise_distances(q, model.centroids, metric)
    id_min = dist[:, model.domain_of == ID].min(axis=1)
    ood_min = dist[:, model.domain_of == OOD].min(axis=1)
    return np.where(id_min < ood_min, ID, OOD).astype(np.int64)


def predict_linear(head: LinearHead, query: np.ndarray) -> int:
    """1 when the sigmoid output strictly exceeds the threshold, else 0."""
    q = np.asarray(query, dtype=np.float64)
    if q.ndim != 1 or q.shape[0] != head.n_dims:
        raise ValueError(f"query has shape {q.shape}, head expects ({head.n_dims},)")
    return int(predict_linear_batch(head, q[None, :])[0])


def predict_linear_batch(head: LinearHead, queries: np.ndarray) -> np.ndarray:
    q = np.asarray(queries, dtype=np.float64)
    if q.ndim != 2 or q.shape[1] != head.n_dims:
        raise ValueError(f"queries have shape {q.shape}, head expects (n, {head.n_dims})")
    return (sigmoid(head.logits(q)) > head.threshold).astype(np.int64)


def init_head(variant: str, n_dims: int, hidden_width: int, seed: int) -> LinearHead:
    """Symmetric uniform init, fully determined by the seed; biases start at zero."""
    rng = np.random.default_rng(seed)

    def glorot(fan_in: int, fan_out: int, shape) -> np.ndarray:
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, size=shape)

    if variant == "fc1":
        return LinearHead("fc1", w1=glorot(n_dims, 1, n_dims), b1=0.0)
    if variant == "fc2":
        return LinearHead(
            "fc2",
            w1=glorot(n_dims, hidden_width, (n_dims, hidden_width)),
            b1=np.zeros(hidden_width),
            w2=glorot(hidden_width, 1, hidden_width),
            b2=0.0,
        )
    raise ValueError(f"unknown head variant {variant!r}")


def loss_and_gradients(
    head: LinearHead,
    x: np.ndarray,
    y: np.ndarray,
    sample_weights: np.ndarray,
    l2_penalty: float,
) -> tuple[float, dict[str, np.ndarray | float]]:
    """Weighted binary cross-entropy (plus L2 on weights) and its gradients.

    The loss is mean(w_i * bce_i) + l2/2 * sum of squared weight entries,
    biases excluded from the penalty. Cross-entropy is evaluated from logits
    for numerical stability.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(sample_weights, dtype=np.float64)
    batch = x.shape[0]

    if head.variant == "fc1":
        z = x @ head.w1 + head.b1
        loss = float(np.mean(w * _bce_from_logits(z, y)))
        dz = w * (sigmoid(z) - y) / batch
        grads = {"w1": x.T @ dz + l2_penalty * head.w1, "b1": float(dz.sum())}
        loss += 0.5 * l2_penalty * float(head.w1 @ head.w1)
        return loss, grads

    z1 = x @ head.w1 + head.b1
    s1 = sigmoid(z1)
    hidden = z1 * s1
    z2 = hidden @ head.w2 + head.b2
    loss = float(np.mean(w * _bce_from_logits(z2, y)))
    loss += 0.5 * l2_penalty * (float((head.w1 ** 2).sum()) + float(head.w2 @ head.w2))
    dz2 = w * (sigmoid(z2) - y) / batch
    dhidden = np.outer(dz2, head.w2)
    dz1 = dhidden * (s1 * (1.0 + z1 * (1.0 - s1)))  # swish'(z) = s(z)(1 + z(1 - s(z)))
    grads = {
        "w1": x.T @ dz1 + l2_penalty * head.w1,
        "b1": dz1.sum(axis=0),
        "w2": hidden.T @ dz2 + l2_penalty * head.w2,
        "b2": float(dz2.sum()),
    }
    return loss, grads


def fit_linear_head(
    id_store: EmbeddingStore,
    ood_store: EmbeddingStore,
    variant: str,
    cfg: TrainConfig,
    hidden_width: int = 256,
) -> LinearHead:
    """Train a decision head on in-domain rows (label 1) vs out-of-domain rows (label 0).

    Mini-batch gradient descent with a fixed step; identical seeds and
    configs reproduce parameters bit for bit.
    """
    _check_train_stores(id_store, ood_store, min_rows=1)
    x = np.vstack(
        [id_store.features.astype(np.float64), ood_store.features.astype(np.float64)]
    )
    y = np.concatenate([np.ones(id_store.n_rows), np.zeros(ood_store.n_rows)])
    n = x.shape[0]

    if cfg.class_weighting == "balanced":
        n_pos = id_store.n_rows
        n_neg = ood_store.n_rows
        weights = np.where(y == 1.0, n / (2.0 * n_pos), n / (2.0 * n_neg))
    else:
        weights = np.ones(n)

    head = init_head(variant, x.shape[1], hidden_width, cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        for batch_no, start in enumerate(range(0, n, cfg.batch_size)):
            idx = order[start : start + cfg.batch_size]
            with np.errstate(invalid="ignore", over="ignore"):
                loss, grads = loss_and_gradients(
                    head, x[idx], y[idx], weights[idx], cfg.l2_penalty
                )
            if not np.isfinite(loss):
                raise TrainingError(
                    f"non-finite loss at epoch {epoch}, batch {batch_no} (variant {variant})"
                )
            head.w1 = head.w1 - cfg.step_size * grads["w1"]
            head.b1 = head.b1 - cfg.step_size * grads["b1"]
            if variant == "fc2":
                head.w2 = head.w2 - cfg.step_size * grads["w2"]
                head.b2 = head.b2 - cfg.step_size * grads["b2"]
    return head


def save_model(model: CentroidModel | LinearHead, path: str | Path) -> None:
    """Write a fitted model in the OWRM1 container (layout in module docstring)."""
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        if isinstance(model, CentroidModel):
            m, d = model.centroids.shape
            fh.write(struct.pack("<BII", _KIND_CENTROID, m, d))
            fh.write(model.domain_of.astype(np.uint8).tobytes())
            fh.write(model.centroids.astype("<f8").tobytes())
        elif isinstance(model, LinearHead) and model.variant == "fc1":
            fh.write(struct.pack("<BId", _KIND_FC1, model.n_dims, model.threshold))
            fh.write(np.asarray(model.w1, dtype="<f8").tobytes())
            fh.write(struct.pack("<d", float(model.b1)))
        elif isinstance(model, LinearHead) and model.variant == "fc2":
            d, h = model.w1.shape
            fh.write(struct.pack("<BIId", _KIND_FC2, d, h, model.threshold))
            fh.write(np.asarray(model.w1, dtype="<f8").tobytes())
            fh.write(np.asarray(model.b1, dtype="<f8").tobytes())
            fh.write(np.asarray(model.w2, dtype="<f8").tobytes())
            fh.write(struct.pack("<d", float(model.b2)))
        else:
            raise TypeError(f"cannot serialize {type(model).__name__}")


def load_model(path: str | Path) -> CentroidModel | LinearHead:
    data = Path(path).read_bytes()
    if len(data) < 6:
        raise ModelFormatError(f"{path}: file too short for a model header")
    if data[:5] != MODEL_MAGIC:
        raise ModelFormatError(f"{path}: bad magic {data[:5]!r}, expected {MODEL_MAGIC!r}")
    kind = data[5]
    body = data[6:]
    try:
        if kind == _KIND_CENTROID:
            m, d = struct.unpack_from("<II", body, 0)
            tags = np.frombuffer(body, dtype=np.uint8, count=m, offset=8)
            cents = np.frombuffer(body, dtype="<f8", count=m * d, offset=8 + m).reshape(m, d)
            _check_exact_length(body, 8 + m + m * d * 8, path)
            return CentroidModel(cents, tags.astype(np.int8))
        if kind == _KIND_FC1:
            (d,) = struct.unpack_from("<I", body, 0)
            (threshold,) = struct.unpack_from("<d", body, 4)
            w1 = np.frombuffer(body, dtype="<f8", count=d, offset=12)
            (b1,) = struct.unpack_from("<d", body, 12 + d * 8)
            _check_exact_length(body, 12 + d * 8 + 8, path)
            return LinearHead("fc1", w1=w1.copy(), b1=b1, threshold=threshold)
        if kind == _KIND_FC2:
            d, h = struct.unpack_from("<II", body, 0)
            (threshold,) = struct.unpack_from("<d", body, 8)
            off = 16
            w1 = np.frombuffer(body, dtype="<f8", count=d * h, offset=off).reshape(d, h)
            off += d * h * 8
            b1 = np.frombuffer(body, dtype="<f8", count=h, offset=off)
            off += h * 8
            w2 = np.frombuffer(body, dtype="<f8", count=h, offset=off)
            off += h * 8
            (b2,) = struct.unpack_from("<d", body, off)
            _check_exact_length(body, off + 8, path)
            return LinearHead(
                "fc2", w1=w1.copy(), b1=b1.copy(), w2=w2.copy(), b2=b2, threshold=threshold
            )
    except (struct.error, ValueError) as exc:
        raise ModelFormatError(f"{path}: truncated or inconsistent model body: {exc}") from None
    raise ModelFormatError(f"{path}: unknown model kind {kind}")


def _check_exact_length(body: bytes, expected: int, path) -> None:
    if len(body) != expected:
        raise ModelFormatError(
            f"{path}: model body is {len(body)} bytes, expected {expected}"
        )


def _bce_from_logits(z: np.ndarray, y: np.ndarray) -> np.ndarray:
    # softplus(z) - y*z, with softplus evaluated stably
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z))) - y * z


def _check_train_stores(id_store: EmbeddingStore, ood_store: EmbeddingStore, min_rows: int) -> None:
    for name, store in (("in-domain", id_store), ("out-of-domain", ood_store)):
        if store.n_rows < min_rows:
            raise ValueError(f"{name} store has {store.n_rows} rows, need at least {min_rows}")
    if id_store.n_dims != ood_store.n_dims:
        raise ValueError(
            f"dimensionality mismatch: {id_store.n_dims} vs {ood_store.n_dims}"
        )
