from __future__ import annotations

import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from domainid.store import (
    EmbeddingStore,
    RowMeta,
    StoreFormatError,
    detect_format,
    load_store,
    save_store,
    select_by_datasets,
)


def make_store(values, labels=None, datasets=None, ids=None):
    values = np.asarray(values, dtype=np.float32)
    n = values.shape[0]
    rows = [
        RowMeta(
            (ids or [f"s{i}" for i in range(n)])[i],
            (labels or ["cat"] * n)[i],
            (datasets or ["D"] * n)[i],
        )
        for i in range(n)
    ]
    return EmbeddingStore(values, rows)


class TestBinaryFormat:
    def test_header_payload_consistency(self, tmp_path):
        path = tmp_path / "two_rows.emb1"
        meta = b"0,s1,a,D\n1,s2,b,D\n"
        payload = struct.pack("<6f", *range(6))
        path.write_bytes(
            b"EMB1" + struct.pack("<III", 1, 2, 3) + payload + struct.pack("<I", len(meta)) + meta
        )
        store = load_store(path, "binary")
        assert store.n_rows == 2
        assert store.n_dims == 3
        assert store.rows[0] == RowMeta("s1", "a", "D")

    def test_truncated_payload_reports_offset(self, tmp_path):
        path = tmp_path / "short.emb1"
        path.write_bytes(b"EMB1" + struct.pack("<III", 1, 2, 3) + b"\x00" * 20)
        with pytest.raises(StoreFormatError, match="truncated payload at byte 36"):
            load_store(path, "binary")

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.emb1"
        path.write_bytes(b"XXXX" + b"\x00" * 20)
        with pytest.raises(StoreFormatError, match="bad magic"):
            load_store(path, "binary")

    def test_unsupported_version(self, tmp_path):
        path = tmp_path / "v9.emb1"
        path.write_bytes(b"EMB1" + struct.pack("<III", 9, 0, 0) + struct.pack("<I", 0))
        with pytest.raises(StoreFormatError, match="version 9"):
            load_store(path, "binary")

    def test_trailing_bytes_rejected(self, tmp_path):
        path = tmp_path / "trail.emb1"
        save_store(make_store([[1.0]]), path, "binary")
        path.write_bytes(path.read_bytes() + b"junk")
        with pytest.raises(StoreFormatError, match="trailing"):
            load_store(path, "binary")

    def test_duplicate_sample_id_names_line(self, tmp_path):
        path = tmp_path / "dup.emb1"
        meta = b"0,s1,a,D\n1,s1,b,D\n"
        payload = struct.pack("<2f", 0.0, 1.0)
        path.write_bytes(
            b"EMB1" + struct.pack("<III", 1, 2, 1) + payload + struct.pack("<I", len(meta)) + meta
        )
        with pytest.raises(StoreFormatError, match="line 2.*duplicate sample_id 's1'"):
            load_store(path, "binary")

    def test_missing_metadata_line(self, tmp_path):
        path = tmp_path / "missing.emb1"
        meta = b"0,s1,a,D\n"
        payload = struct.pack("<2f", 0.0, 1.0)
        path.write_bytes(
            b"EMB1" + struct.pack("<III", 1, 2, 1) + payload + struct.pack("<I", len(meta)) + meta
        )
        with pytest.raises(StoreFormatError, match="missing for row indices"):
            load_store(path, "binary")

    def test_roundtrip_1x1_identical_bytes(self, tmp_path):
        store = make_store([[0.5]])
        first, second = tmp_path / "a.emb1", tmp_path / "b.emb1"
        save_store(store, first, "binary")
        save_store(load_store(first, "binary"), second, "binary")
        assert first.read_bytes() == second.read_bytes()

    def test_roundtrip_100x64_bitwise(self, tmp_path):
        rng = np.random.default_rng(42)
        store = make_store(rng.standard_normal((100, 64)).astype(np.float32))
        path = tmp_path / "big.emb1"
        save_store(store, path, "binary")
        again = load_store(path, "binary")
        assert again.features.tobytes() == store.features.tobytes()
        assert again == store

    def test_roundtrip_preserves_nonfinite_bits(self, tmp_path):
        store = make_store([[np.nan, np.inf], [-np.inf, 0.0]])
        path = tmp_path / "nf.emb1"
        save_store(store, path, "binary")
        assert load_store(path, "binary") == store


class TestCsvFormat:
    def test_direct_parse(self, tmp_path):
        path = tmp_path / "rows.csv"
        path.write_text("s1,catA,Garbage6,0.1,0.2\ns2,catB,Garbage6,0.3,0.4\n")
        store = load_store(path, "csv")
        assert store.n_dims == 2
        assert {m.class_label for m in store.rows} == {"catA", "catB"}

    def test_header_detected_by_nonnumeric_fourth_field(self, tmp_path):
        path = tmp_path / "with_header.csv"
        path.write_text("sample_id,class_label,dataset_name,v0\ns1,a,D,1.5\n")
        store = load_store(path, "csv")
        assert store.n_rows == 1
        assert store.features[0, 0] == np.float32(1.5)

    def test_value_survives_decimal_roundtrip(self, tmp_path):
        store = make_store([[0.1]])
        path = tmp_path / "v.csv"
        save_store(store, path, "csv")
        assert load_store(path, "csv").features[0, 0] == np.float32(0.1)

    def test_full_roundtrip_equality(self, tmp_path):
        rng = np.random.default_rng(7)
        store = make_store(
            rng.standard_normal((20, 5)).astype(np.float32),
            labels=[f"c{i % 3}" for i in range(20)],
            datasets=[f"D{i % 2}" for i in range(20)],
        )
        path = tmp_path / "r.csv"
        save_store(store, path, "csv")
        assert load_store(path, "csv") == store

    def test_inconsistent_width_names_line(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("s1,a,D,0.1,0.2\ns2,a,D,0.3\n")
        with pytest.raises(StoreFormatError, match="line 2"):
            load_store(path, "csv")

    def test_duplicate_sample_id(self, tmp_path):
        path = tmp_path / "dup.csv"
        path.write_text("s1,a,D,0.1\ns1,b,D,0.2\n")
        with pytest.raises(StoreFormatError, match="duplicate sample_id"):
            load_store(path, "csv")

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(StoreFormatError, match="no data rows"):
            load_store(path, "csv")


class TestSelectByDatasets:
    def build(self):
        return make_store(
            [[0.0], [1.0], [2.0], [3.0]],
            datasets=["A", "B", "A", "B"],
            labels=["w", "x", "y", "z"],
        )

    def test_filters_and_preserves_order(self):
        picked = select_by_datasets(self.build(), {"A"})
        assert [m.sample_id for m in picked.rows] == ["s0", "s2"]
        assert picked.features[:, 0].tolist() == [0.0, 2.0]

    def test_empty_selection_keeps_dims(self):
        picked = select_by_datasets(self.build(), set())
        assert picked.n_rows == 0
        assert picked.n_dims == 1

    def test_full_selection_is_identity(self):
        store = self.build()
        assert select_by_datasets(store, {"A", "B"}) == store

    def test_idempotent(self):
        store = self.build()
        once = select_by_datasets(store, {"B"})
        assert select_by_datasets(once, {"B"}) == once

    def test_disjoint_selections_concatenate_to_union(self):
        store = self.build()
        only_a = select_by_datasets(store, {"A"})
        only_b = select_by_datasets(store, {"B"})
        union = select_by_datasets(store, {"A", "B"})
        merged_ids = sorted(m.sample_id for m in only_a.rows + only_b.rows)
        assert merged_ids == sorted(m.sample_id for m in union.rows)
        assert only_a.n_rows + only_b.n_rows == union.n_rows


class TestValidation:
    def test_duplicate_ids_rejected_at_construction(self):
        with pytest.raises(ValueError, match="duplicate sample_id"):
            make_store([[0.0], [1.0]], ids=["s", "s"])

    def test_empty_class_label_rejected(self):
        with pytest.raises(ValueError, match="empty class_label"):
            make_store([[0.0]], labels=[""])

    def test_metadata_count_must_match(self):
        with pytest.raises(ValueError, match="does not match"):
            EmbeddingStore(np.zeros((2, 1), dtype=np.float32), [RowMeta("s0", "a", "D")])

    def test_store_is_immutable(self):
        store = make_store([[1.0]])
        with pytest.raises(ValueError):
            store.features[0, 0] = 2.0
        with pytest.raises(AttributeError):
            store.features = np.zeros((1, 1))

    def test_detect_format(self, tmp_path):
        binary, csv = tmp_path / "x.emb1", tmp_path / "x.csv"
        store = make_store([[1.0]])
        save_store(store, binary, "binary")
        save_store(store, csv, "csv")
        assert detect_format(binary) == "binary"
        assert detect_format(csv) == "csv"


@settings(max_examples=50, deadline=None)
@given(
    data=st.lists(
        st.lists(st.floats(width=32, allow_nan=False), min_size=3, max_size=3),
        min_size=1,
        max_size=8,
    )
)
def test_binary_roundtrip_property(tmp_path_factory, data):
    store = make_store(np.array(data, dtype=np.float32))
    path = tmp_path_factory.mktemp("prop") / "p.emb1"
    save_store(store, path, "binary")
    assert load_store(path, "binary") == store
