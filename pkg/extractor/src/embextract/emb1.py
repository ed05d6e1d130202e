"""Self-contained writer and validator for the EMB1 store format.

This module deliberately reimplements the format rather than importing the
consumer library, so a successful ``verify`` is a real conformance check
between independent codebases.

Layout (little-endian): magic "EMB1", u32 version (=1), u32 n_rows,
u32 n_dims, n_rows*n_dims float32 row-major, u32 metadata byte length,
UTF-8 CSV lines ``row_index,sample_id,class_label,dataset_name``.
"""

from __future__ import annotations

import csv
import io
import os
import struct
import tempfile
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"EMB1"
VERSION = 1


class Emb1FormatError(ValueError):
    """The file violates the EMB1 contract."""


@dataclass
class StoreSummary:
    n_rows: int
    n_dims: int
    class_histogram: dict[str, int]
    dataset_names: set[str]

    def render(self) -> str:
        lines = [f"rows={self.n_rows} dims={self.n_dims} datasets={sorted(self.dataset_names)}"]
        for label, count in sorted(self.class_histogram.items()):
            lines.append(f"  {label}: {count}")
        return "\n".join(lines)


def write_store(
    path: str | Path,
    features: np.ndarray,
    sample_ids: list[str],
    class_labels: list[str],
    dataset_name: str,
) -> None:
    """Write one EMB1 file atomically (temp file in place, then rename)."""
    features = np.ascontiguousarray(features, dtype="<f4")
    if features.ndim != 2:
        raise ValueError("features must be 2-D")
    n_rows, n_dims = features.shape
    if not (len(sample_ids) == len(class_labels) == n_rows):
        raise ValueError("metadata lists must match the number of rows")

    meta_buf = io.StringIO()
    writer = csv.writer(meta_buf, lineterminator="\n")
    for i in range(n_rows):
        writer.writerow([i, sample_ids[i], class_labels[i], dataset_name])
    meta_bytes = meta_buf.getvalue().encode("utf-8")

    path = Path(path)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".emb1.tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<III", VERSION, n_rows, n_dims))
            fh.write(features.tobytes())
            fh.write(struct.pack("<I", len(meta_bytes)))
            fh.write(meta_bytes)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def verify_store(path: str | Path) -> StoreSummary:
    """Parse and validate an EMB1 file, returning row and class counts."""
    data = Path(path).read_bytes()
    if len(data) < 16:
        raise Emb1FormatError(f"{path}: file too short for the 16-byte header")
    if data[:4] != MAGIC:
        raise Emb1FormatError(f"{path}: bad magic {data[:4]!r}")
    version, n_rows, n_dims = struct.unpack_from("<III", data, 4)
    if version != VERSION:
        raise Emb1FormatError(f"{path}: unsupported version {version}")
    payload_len = n_rows * n_dims * 4
    if len(data) < 16 + payload_len + 4:
        raise Emb1FormatError(f"{path}: truncated payload or metadata length")
    (meta_len,) = struct.unpack_from("<I", data, 16 + payload_len)
    meta_start = 16 + payload_len + 4
    if len(data) != meta_start + meta_len:
        raise Emb1FormatError(f"{path}: metadata length disagrees with file size")
    try:
        meta_text = data[meta_start:].decode("utf-8")
    except UnicodeDecodeError:
        raise Emb1FormatError(f"{path}: metadata is not valid UTF-8") from None

    seen_indices: set[int] = set()
    seen_ids: set[str] = set()
    histogram: Counter[str] = Counter()
    datasets: set[str] = set()
    for line_no, fields in enumerate(csv.reader(io.StringIO(meta_text)), start=1):
        if len(fields) != 4:
            raise Emb1FormatError(f"{path}: metadata line {line_no}: expected 4 fields")
        idx_text, sample_id, class_label, dataset_name = fields
        try:
            idx = int(idx_text)
        except ValueError:
            raise Emb1FormatError(f"{path}: metadata line {line_no}: bad row index") from None
        if not 0 <= idx < n_rows or idx in seen_indices:
            raise Emb1FormatError(f"{path}: metadata line {line_no}: bad or repeated row index {idx}")
        if sample_id in seen_ids:
            raise Emb1FormatError(f"{path}: metadata line {line_no}: duplicate sample_id")
        if not class_label or not dataset_name:
            raise Emb1FormatError(f"{path}: metadata line {line_no}: empty label field")
        seen_indices.add(idx)
        seen_ids.add(sample_id)
        histogram[class_label] += 1
        datasets.add(dataset_name)
    if len(seen_indices) != n_rows:
        raise Emb1FormatError(f"{path}: {n_rows - len(seen_indices)} metadata lines missing")
    return StoreSummary(n_rows, n_dims, dict(histogram), datasets)
