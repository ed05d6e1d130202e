"""Cross-component conformance: stores written here must load cleanly in the
consumer CLI, which is only reached through its command line and the file
format (no imports from it)."""

from __future__ import annotations

import csv
import importlib.util
import subprocess
import sys
from collections import Counter

import pytest

from embextract.cli import main
from embextract.extract import ExtractionJob, extract

needs_consumer = pytest.mark.skipif(
    importlib.util.find_spec("domainid") is None,
    reason="consumer package not installed",
)


@needs_consumer
def test_toy_folder_store_loads_in_consumer_cli(tmp_path, toy_folder):
    root, census = toy_folder
    store_path = tmp_path / "toy.emb1"
    result = extract(
        ExtractionJob(
            backbone="mnet_v3_large",
            input_dir=root,
            output_path=store_path,
            pretrained=False,
        )
    )
    assert result.n_rows == sum(census.values()) == 10

    csv_path = tmp_path / "toy.csv"
    completed = subprocess.run(
        [
            sys.executable, "-m", "domainid.cli",
            "convert", str(store_path), str(csv_path), "--format", "csv",
        ],
        capture_output=True,
        text=True,
    )
    assert completed.returncode == 0, completed.stderr

    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)  # header
        loaded = Counter(fields[1] for fields in reader)
    assert dict(loaded) == census


def test_verify_cli_passes_fresh_store_and_fails_corrupted(tmp_path, toy_folder, capsys):
    root, census = toy_folder
    store_path = tmp_path / "toy.emb1"
    assert main(
        [
            "extract",
            "--backbone", "mnet_v3_large",
            "--input", str(root),
            "--output", str(store_path),
            "--untrained",
        ]
    ) == 0
    assert main(["verify", str(store_path)]) == 0
    out = capsys.readouterr().out
    for label, count in census.items():
        assert f"{label}: {count}" in out

    data = bytearray(store_path.read_bytes())
    data[0] ^= 0xFF
    store_path.write_bytes(bytes(data))
    assert main(["verify", str(store_path)]) != 0
