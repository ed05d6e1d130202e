"""Labeled feature-matrix storage: load, validate, persist, subset.

Two on-disk formats are supported.

Binary format "EMB1" (little-endian throughout):

    bytes 0..3    magic ``45 4D 42 31`` ("EMB1")
    bytes 4..7    u32 format version (currently 1)
    bytes 8..11   u32 n_rows
    bytes 12..15  u32 n_dims
    then          n_rows * n_dims IEEE-754 32-bit floats, row-major
    then          u32 byte length of the metadata block
    then          that many bytes of UTF-8 CSV lines
                  ``row_index,sample_id,class_label,dataset_name``

CSV format: one row per line, ``sample_id,class_label,dataset_name,v0,...``.
A header line is optional and detected by a non-numeric fourth field.
Feature values are written with the shortest decimal rendering that parses
back to the identical 32-bit float.
"""

from __future__ import annotations

import csv
import io
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Literal

import numpy as np

MAGIC = b"EMB1"
FORMAT_VERSION = 1
HEADER_SIZE = 16

StoreFormat = Literal["binary", "csv"]


class StoreFormatError(ValueError):
    """A store file violates the on-disk contract (offset or line in message)."""


@dataclass(frozen=True)
class RowMeta:
    """Identity of one feature row."""

    sample_id: str
    class_label: str
    dataset_name: str


class EmbeddingStore:
    """Immutable rectangular float32 feature matrix with per-row metadata.

    Feature values are stored as 32-bit floats; consumers that do distance
    arithmetic promote to 64-bit. Row order is construction order and is
    never changed implicitly.
    """

    __slots__ = ("features", "rows")

    def __init__(self, features: np.ndarray, rows: Iterable[RowMeta]):
        feats = np.array(features, dtype=np.float32, order="C", copy=True)
        if feats.ndim != 2:
            raise ValueError(f"features must be a 2-D matrix, got ndim={feats.ndim}")
        row_tuple = tuple(rows)
        if len(row_tuple) != feats.shape[0]:
            raise ValueError(
                f"metadata count {len(row_tuple)} does not match n_rows {feats.shape[0]}"
            )
        seen: set[str] = set()
        for i, meta in enumerate(row_tuple):
            if not meta.class_label:
                raise ValueError(f"row {i}: empty class_label")
            if not meta.dataset_name:
                raise ValueError(f"row {i}: empty dataset_name")
            if meta.sample_id in seen:
                raise ValueError(f"row {i}: duplicate sample_id {meta.sample_id!r}")
            seen.add(meta.sample_id)
        feats.flags.writeable = False
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "rows", row_tuple)

    def __setattr__(self, name, value):
        raise AttributeError("EmbeddingStore is immutable")

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_dims(self) -> int:
        return self.features.shape[1]

    def dataset_names(self) -> set[str]:
        return {meta.dataset_name for meta in self.rows}

    def classes_in(self, names: Iterable[str]) -> set[str]:
        """Class labels occurring in rows belonging to the given datasets."""
        wanted = set(names)
        return {m.class_label for m in self.rows if m.dataset_name in wanted}

    def __eq__(self, other) -> bool:
        if not isinstance(other, EmbeddingStore):
            return NotImplemented
        return (
            self.features.shape == other.features.shape
            and self.features.tobytes() == other.features.tobytes()
            and self.rows == other.rows
        )

    def __hash__(self):
        return hash((self.features.shape, self.features.tobytes(), self.rows))

    def __repr__(self) -> str:
        return (
            f"EmbeddingStore(n_rows={self.n_rows}, n_dims={self.n_dims}, "
            f"datasets={sorted(self.dataset_names())})"
        )


def select_by_datasets(store: EmbeddingStore, names: Iterable[str]) -> EmbeddingStore:
    """Rows whose dataset_name is in ``names``, original order preserved.

    An empty selection is valid and keeps the store's dimensionality.
    """
    wanted = set(names)
    keep = [i for i, m in enumerate(store.rows) if m.dataset_name in wanted]
    return EmbeddingStore(store.features[keep], (store.rows[i] for i in keep))


def detect_format(path: str | Path) -> StoreFormat:
    """Sniff a store file: EMB1 magic means binary, anything else is CSV."""
    with open(path, "rb") as fh:
        return "binary" if fh.read(4) == MAGIC else "csv"


def load_store(path: str | Path, format: StoreFormat = "binary") -> EmbeddingStore:
    if format == "binary":
        return _load_binary(Path(path))
    if format == "csv":
        return _load_csv(Path(path))
    raise ValueError(f"unknown store format {format!r}")


def save_store(store: EmbeddingStore, path: str | Path, format: StoreFormat = "binary") -> None:
    if format == "binary":
        _save_binary(store, Path(path))
    elif format == "csv":
        _save_csv(store, Path(path))
    else:
        raise ValueError(f"unknown store format {format!r}")


def _save_binary(store: EmbeddingStore, path: Path) -> None:
    meta_buf = io.StringIO()
    writer = csv.writer(meta_buf, lineterminator="\n")
    for i, m in enumerate(store.rows):
        writer.writerow([i, m.sample_id, m.class_label, m.dataset_name])
    meta_bytes = meta_buf.getvalue().encode("utf-8")
    payload = np.ascontiguousarray(store.features, dtype="<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<III", FORMAT_VERSION, store.n_rows, store.n_dims))
        fh.write(payload)
        fh.write(struct.pack("<I", len(meta_bytes)))
        fh.write(meta_bytes)


def _load_binary(path: Path) -> EmbeddingStore:
    data = path.read_bytes()
    if len(data) < HEADER_SIZE:
        raise StoreFormatError(
            f"{path}: truncated header at byte {len(data)}: "
            f"need {HEADER_SIZE} header bytes, file has {len(data)}"
        )
    if data[:4] != MAGIC:
        raise StoreFormatError(f"{path}: bad magic {data[:4]!r} at byte 0, expected {MAGIC!r}")
    version, n_rows, n_dims = struct.unpack_from("<III", data, 4)
    if version != FORMAT_VERSION:
        raise StoreFormatError(f"{path}: unsupported format version {version} at byte 4")
    payload_len = n_rows * n_dims * 4
    available = len(data) - HEADER_SIZE
    if available < payload_len:
        raise StoreFormatError(
            f"{path}: truncated payload at byte {HEADER_SIZE + available}: "
            f"header declares {payload_len} payload bytes, found {available}"
        )
    features = np.frombuffer(data, dtype="<f4", count=n_rows * n_dims, offset=HEADER_SIZE)
    features = features.reshape(n_rows, n_dims)

    meta_off = HEADER_SIZE + payload_len
    if len(data) < meta_off + 4:
        raise StoreFormatError(f"{path}: truncated metadata length field at byte {meta_off}")
    (meta_len,) = struct.unpack_from("<I", data, meta_off)
    meta_start = meta_off + 4
    if len(data) < meta_start + meta_len:
        raise StoreFormatError(
            f"{path}: truncated metadata block at byte {len(data)}: "
            f"declared {meta_len} bytes, found {len(data) - meta_start}"
        )
    if len(data) > meta_start + meta_len:
        raise StoreFormatError(
            f"{path}: {len(data) - meta_start - meta_len} trailing bytes "
            f"at byte {meta_start + meta_len}"
        )
    try:
        meta_text = data[meta_start : meta_start + meta_len].decode("utf-8")
    except UnicodeDecodeError as exc:
        raise StoreFormatError(
            f"{path}: metadata block is not valid UTF-8 at byte {meta_start + exc.start}"
        ) from None

    metas: list[RowMeta | None] = [None] * n_rows
    seen_ids: dict[str, int] = {}
    for line_no, fields in enumerate(csv.reader(io.StringIO(meta_text)), start=1):
        if len(fields) != 4:
            raise StoreFormatError(
                f"{path}: metadata line {line_no}: expected 4 fields, got {len(fields)}"
            )
        idx_text, sample_id, class_label, dataset_name = fields
        try:
            idx = int(idx_text)
        except ValueError:
            raise StoreFormatError(
                f"{path}: metadata line {line_no}: bad row index {idx_text!r}"
            ) from None
        if not 0 <= idx < n_rows:
            raise StoreFormatError(
                f"{path}: metadata line {line_no}: row index {idx} out of range 0..{n_rows - 1}"
            )
        if metas[idx] is not None:
            raise StoreFormatError(
                f"{path}: metadata line {line_no}: duplicate row index {idx}"
            )
        if sample_id in seen_ids:
            raise StoreFormatError(
                f"{path}: metadata line {line_no}: duplicate sample_id {sample_id!r} "
                f"(first seen on line {seen_ids[sample_id]})"
            )
        if not class_label:
            raise StoreFormatError(f"{path}: metadata line {line_no}: empty class_label")
        if not dataset_name:
            raise StoreFormatError(f"{path}: metadata line {line_no}: empty dataset_name")
        seen_ids[sample_id] = line_no
        metas[idx] = RowMeta(sample_id, class_label, dataset_name)
    missing = [i for i, m in enumerate(metas) if m is None]
    if missing:
        raise StoreFormatError(
            f"{path}: metadata lines missing for row indices {missing[:5]}"
            + ("..." if len(missing) > 5 else "")
        )
    return EmbeddingStore(features, metas)  # type: ignore[arg-type]


def _render_value(v: np.float32) -> str:
    # numpy scalar str() is the shortest decimal that round-trips the float32
    return str(np.float32(v))


def _save_csv(store: EmbeddingStore, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["sample_id", "class_label", "dataset_name"] + [f"v{i}" for i in range(store.n_dims)]
        )
        for meta, row in zip(store.rows, store.features):
            writer.writerow(
                [meta.sample_id, meta.class_label, meta.dataset_name]
                + [_render_value(v) for v in row]
            )


def _is_numeric(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def _load_csv(path: Path) -> EmbeddingStore:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        metas: list[RowMeta] = []
        values: list[list[np.float32]] = []
        seen_ids: dict[str, int] = {}
        n_dims: int | None = None
        for line_no, fields in enumerate(reader, start=1):
            if not fields:
                continue
            if len(fields) < 4:
                raise StoreFormatError(
                    f"{path}: line {line_no}: expected at least 4 fields, got {len(fields)}"
                )
            if line_no == 1 and not _is_numeric(fields[3]):
                continue  # optional header
            sample_id, class_label, dataset_name = fields[0], fields[1], fields[2]
            if not class_label:
                raise StoreFormatError(f"{path}: line {line_no}: empty class_label")
            if not dataset_name:
                raise StoreFormatError(f"{path}: line {line_no}: empty dataset_name")
            if sample_id in seen_ids:
                raise StoreFormatError(
                    f"{path}: line {line_no}: duplicate sample_id {sample_id!r} "
                    f"(first seen on line {seen_ids[sample_id]})"
                )
            seen_ids[sample_id] = line_no
            row_dims = len(fields) - 3
            if n_dims is None:
                n_dims = row_dims
            elif row_dims != n_dims:
                raise StoreFormatError(
                    f"{path}: line {line_no}: {row_dims} values, expected {n_dims}"
                )
            try:
                row = [np.float32(float(v)) for v in fields[3:]]
            except ValueError as exc:
                raise StoreFormatError(f"{path}: line {line_no}: {exc}") from None
            metas.append(RowMeta(sample_id, class_label, dataset_name))
            values.append(row)
    if n_dims is None:
        raise StoreFormatError(f"{path}: no data rows")
    return EmbeddingStore(np.array(values, dtype=np.float32), metas)
