"""Scenario manifests, split validation, end-to-end runs, and report tables.

A scenario names the datasets whose rows form the training reference for
each domain and the datasets whose rows are scored at test time. Train and
test class sets must be disjoint on each side, and no class may appear both
in-domain and out-of-domain. Class sets are always derived from the store's
labels at run time.

Manifest JSON schema::

    {"name": str,
     "train": {"id": [str], "ood": [str]},
     "test":  {"id": [str], "ood": [str]},
     "exclude_classes": [str],   # optional, dropped from the test side
     "seed": int}                # optional

Report JSON carries the scenario, approach and backbone tags, overall
confusion counts, the balanced-accuracy score, and a per-dataset breakdown.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .classifiers import (
    CentroidModel,
    LinearHead,
    TrainConfig,
    fit_linear_head,
    fit_ncm,
    fit_ncm_finch,
    predict_centroid_batch,
    predict_linear_batch,
)
from .metrics import ConfusionCounts, baccu, count_confusion
from .store import EmbeddingStore, select_by_datasets

APPROACHES = ("ncm", "ncm_finch", "fc1", "fc2")
APPROACH_LABELS = {"ncm": "NCM", "ncm_finch": "NCM+FINCH", "fc1": "FC1", "fc2": "FC2"}
_LABEL_TO_KEY = {v: k for k, v in APPROACH_LABELS.items()}


@dataclass(frozen=True)
class Violation:
    """One class straddling two dataset lists that must stay disjoint."""

    class_label: str
    first_list: str
    second_list: str

    def __str__(self) -> str:
        return (
            f"class {self.class_label!r} appears in both "
            f"{self.first_list} and {self.second_list}"
        )


class ManifestError(ValueError):
    def __init__(self, message: str, violations: Sequence[Violation] = ()):
        super().__init__(message)
        self.violations = tuple(violations)


@dataclass(frozen=True)
class ScenarioManifest:
    name: str
    train_id: tuple[str, ...]
    train_ood: tuple[str, ...]
    test_id: tuple[str, ...]
    test_ood: tuple[str, ...]
    exclude_classes: tuple[str, ...] = ()
    seed: int | None = None

    def __post_init__(self):
        for attr in ("train_id", "train_ood", "test_id", "test_ood"):
            value = tuple(getattr(self, attr))
            object.__setattr__(self, attr, value)
            if not value:
                raise ManifestError(f"manifest {self.name!r}: {attr} must not be empty")
        object.__setattr__(self, "exclude_classes", tuple(self.exclude_classes))

    @classmethod
    def from_dict(cls, doc: dict) -> "ScenarioManifest":
        try:
            return cls(
                name=doc["name"],
                train_id=tuple(doc["train"]["id"]),
                train_ood=tuple(doc["train"]["ood"]),
                test_id=tuple(doc["test"]["id"]),
                test_ood=tuple(doc["test"]["ood"]),
                exclude_classes=tuple(doc.get("exclude_classes", ())),
                seed=doc.get("seed"),
            )
        except (KeyError, TypeError) as exc:
            raise ManifestError(f"manifest document is missing field: {exc}") from None

    def to_dict(self) -> dict:
        doc: dict = {
            "name": self.name,
            "train": {"id": list(self.train_id), "ood": list(self.train_ood)},
            "test": {"id": list(self.test_id), "ood": list(self.test_ood)},
        }
        if self.exclude_classes:
            doc["exclude_classes"] = list(self.exclude_classes)
        if self.seed is not None:
            doc["seed"] = self.seed
        return doc


def load_manifest(path: str | Path) -> ScenarioManifest:
    with open(path, "r", encoding="utf-8") as fh:
        return ScenarioManifest.from_dict(json.load(fh))


def bundled_manifest(name: str) -> ScenarioManifest:
    """A manifest shipped with the package (exp1..exp5 and synth)."""
    resource = Path(__file__).parent / "manifests" / f"{name.lower()}.json"
    if not resource.exists():
        available = sorted(p.stem for p in resource.parent.glob("*.json"))
        raise KeyError(f"no bundled manifest {name!r}; available: {available}")
    return load_manifest(resource)


@dataclass
class EvaluationReport:
    scenario: str
    approach: str  # display tag: NCM, NCM+FINCH, FC1, FC2
    backbone: str
    confusion: ConfusionCounts
    baccu: float
    per_dataset: dict[str, ConfusionCounts] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "approach": self.approach,
            "backbone": self.backbone,
            "confusion": asdict(self.confusion),
            "baccu": self.baccu,
            "per_dataset": {name: asdict(c) for name, c in self.per_dataset.items()},
        }

    def to_json(self) -> str:
        """Deterministic rendering: same report, same bytes."""
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "EvaluationReport":
        return cls(
            scenario=doc["scenario"],
            approach=doc["approach"],
            backbone=doc["backbone"],
            confusion=ConfusionCounts(**doc["confusion"]),
            baccu=doc["baccu"],
            per_dataset={k: ConfusionCounts(**v) for k, v in doc["per_dataset"].items()},
        )


def validate_manifest(m: ScenarioManifest, store: EmbeddingStore) -> list[Violation]:
    """Check the class-disjointness requirements against the store's labels.

    Returns the violations found (empty means valid). Classes listed in the
    manifest's exclusion list are ignored on the test side. A dataset named
    by the manifest but absent from the store is an error, not a violation.
    """
    present = store.dataset_names()
    for attr in ("train_id", "train_ood", "test_id", "test_ood"):
        missing = [d for d in getattr(m, attr) if d not in present]
        if missing:
            raise ManifestError(
                f"manifest {m.name!r}: {attr} references datasets absent from the store: "
                f"{missing}"
            )

    excluded = set(m.exclude_classes)
    classes = {
        "train_id": store.classes_in(m.train_id),
        "train_ood": store.classes_in(m.train_ood),
        "test_id": store.classes_in(m.test_id) - excluded,
        "test_ood": store.classes_in(m.test_ood) - excluded,
    }
    pairs = [
        ("train_id", "test_id"),
        ("train_ood", "test_ood"),
        ("train_id", "train_ood"),
        ("train_id", "test_ood"),
        ("test_id", "train_ood"),
        ("test_id", "test_ood"),
    ]
    violations = []
    for first, second in pairs:
        for label in sorted(classes[first] & classes[second]):
            violations.append(Violation(label, first, second))
    return violations


def run_scenario(
    manifest: ScenarioManifest,
    store: EmbeddingStore,
    approach: str,
    *,
    metric: str = "euclidean",
    seed: int | None = None,
    backbone: str = "unspecified",
    train_config: TrainConfig | None = None,
    hidden_width: int = 256,
    override_validation: bool = False,
) -> EvaluationReport:
    """Fit on the train datasets, score every test row, return the report.

    Truth is 1 for rows from test in-domain datasets and 0 for test
    out-of-domain datasets. The run is deterministic for a given seed, and
    independent of the store's row order: training rows are put into a
    canonical order (sorted by sample_id) before fitting. Seed precedence is
    the explicit argument, then the manifest's seed, then the training
    config's own (default 0).
    """
    if approach not in APPROACHES:
        raise ValueError(f"unknown approach {approach!r}, expected one of {APPROACHES}")
    _require_valid(manifest, store, override_validation)

    train_id = _canonical_order(select_by_datasets(store, manifest.train_id))
    train_ood = _canonical_order(select_by_datasets(store, manifest.train_ood))

    if approach == "ncm":
        model: CentroidModel | LinearHead = fit_ncm(train_id, train_ood)
    elif approach == "ncm_finch":
        model = fit_ncm_finch(train_id, train_ood, metric)
    else:
        cfg = train_config or TrainConfig()
        # explicit seed wins, then the manifest's, then the config's own
        if seed is not None:
            cfg = replace(cfg, seed=seed)
        elif manifest.seed is not None:
            cfg = replace(cfg, seed=manifest.seed)
        model = fit_linear_head(train_id, train_ood, approach, cfg, hidden_width)
    return _score(manifest, store, model, approach, metric, backbone)


def evaluate_with_model(
    manifest: ScenarioManifest,
    store: EmbeddingStore,
    model: CentroidModel | LinearHead,
    approach: str,
    *,
    metric: str = "euclidean",
    backbone: str = "unspecified",
    override_validation: bool = False,
) -> EvaluationReport:
    """Score a scenario's test rows with an already-fitted model."""
    if approach not in APPROACHES:
        raise ValueError(f"unknown approach {approach!r}, expected one of {APPROACHES}")
    expects_head = approach in ("fc1", "fc2")
    if isinstance(model, LinearHead) != expects_head or (
        isinstance(model, LinearHead) and model.variant != approach
    ):
        raise ValueError(f"model of type {type(model).__name__} does not match approach {approach!r}")
    _require_valid(manifest, store, override_validation)
    return _score(manifest, store, model, approach, metric, backbone)


def _require_valid(manifest: ScenarioManifest, store: EmbeddingStore, override: bool) -> None:
    violations = validate_manifest(manifest, store)
    if violations and not override:
        raise ManifestError(
            f"manifest {manifest.name!r} failed validation "
            f"({len(violations)} violation(s))",
            violations,
        )


def _score(
    manifest: ScenarioManifest,
    store: EmbeddingStore,
    model: CentroidModel | LinearHead,
    approach: str,
    metric: str,
    backbone: str,
) -> EvaluationReport:
    excluded = set(manifest.exclude_classes)
    id_sets, ood_sets = set(manifest.test_id), set(manifest.test_ood)
    test_rows = [
        (i, meta)
        for i, meta in enumerate(store.rows)
        if meta.dataset_name in id_sets | ood_sets and meta.class_label not in excluded
    ]
    queries = store.features[[i for i, _ in test_rows]].astype(np.float64)
    truths = np.array(
        [1 if meta.dataset_name in id_sets else 0 for _, meta in test_rows], dtype=np.int64
    )
    if isinstance(model, LinearHead):
        predictions = predict_linear_batch(model, queries)
    else:
        predictions = predict_centroid_batch(model, queries, metric)

    overall = count_confusion(predictions, truths)
    per_dataset: dict[str, ConfusionCounts] = {}
    names = [meta.dataset_name for _, meta in test_rows]
    for dataset in sorted(set(names)):
        mask = np.array([name == dataset for name in names])
        per_dataset[dataset] = count_confusion(predictions[mask], truths[mask])
    summed = _sum_counts(per_dataset.values())
    if summed != overall:
        raise AssertionError(
            f"per-dataset counts {summed} do not sum to the overall counts {overall}"
        )

    return EvaluationReport(
        scenario=manifest.name,
        approach=APPROACH_LABELS[approach],
        backbone=backbone,
        confusion=overall,
        baccu=baccu(overall),
        per_dataset=per_dataset,
    )


def render_report_table(reports: Sequence[EvaluationReport], format: str = "text") -> str:
    """Scores grouped by backbone and scenario, one column per approach.

    Rows are ordered lexicographically by (backbone, scenario); columns keep
    the fixed order NCM, NCM+FINCH, FC1, FC2, restricted to the approaches
    present. Scores print with four decimals.
    """
    if not reports:
        raise ValueError("no reports to render")
    if format == "json":
        ordered = sorted(reports, key=_report_sort_key)
        return json.dumps([r.to_dict() for r in ordered], sort_keys=True, indent=2) + "\n"

    columns = [
        label
        for label in APPROACH_LABELS.values()
        if any(r.approach == label for r in reports)
    ]
    cells: dict[tuple[str, str], dict[str, str]] = {}
    for r in reports:
        cells.setdefault((r.backbone, r.scenario), {})[r.approach] = f"{r.baccu:.4f}"
    row_keys = sorted(cells)

    header = ["backbone", "scenario"] + columns
    table = [
        [backbone, scenario] + [cells[(backbone, scenario)].get(c, "") for c in columns]
        for backbone, scenario in row_keys
    ]
    if format == "csv":
        lines = [",".join(header)] + [",".join(row) for row in table]
        return "\n".join(lines) + "\n"
    if format == "text":
        widths = [max(len(str(r[i])) for r in [header] + table) for i in range(len(header))]
        lines = [
            "  ".join(str(cell).ljust(w) for cell, w in zip(row, widths)).rstrip()
            for row in [header] + table
        ]
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {format!r}")


def _report_sort_key(r: EvaluationReport):
    order = list(APPROACH_LABELS.values())
    pos = order.index(r.approach) if r.approach in order else len(order)
    return (r.backbone, r.scenario, pos)


def _canonical_order(store: EmbeddingStore) -> EmbeddingStore:
    order = sorted(range(store.n_rows), key=lambda i: store.rows[i].sample_id)
    return EmbeddingStore(store.features[order], (store.rows[i] for i in order))


def _sum_counts(counts) -> ConfusionCounts:
    total = ConfusionCounts(0, 0, 0, 0)
    for c in counts:
        total = total + c
    return total
