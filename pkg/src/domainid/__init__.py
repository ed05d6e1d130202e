"""Separating unknown in-domain from out-of-domain samples over stored features."""

from .classifiers import (
    ID,
    OOD,
    CentroidModel,
    LinearHead,
    ModelFormatError,
    TrainConfig,
    TrainingError,
    fit_linear_head,
    fit_ncm,
    fit_ncm_finch,
    load_model,
    predict_centroid,
    predict_centroid_batch,
    predict_linear,
    predict_linear_batch,
    save_model,
    swish,
)
from .finch import (
    FirstNeighborTable,
    Partition,
    PartitionHierarchy,
    adjacency_partition,
    finch,
    first_neighbors,
    select_partition,
)
from .metrics import ConfusionCounts, baccu, count_confusion
from .protocol import (
    APPROACHES,
    EvaluationReport,
    ManifestError,
    ScenarioManifest,
    Violation,
    bundled_manifest,
    evaluate_with_model,
    load_manifest,
    render_report_table,
    run_scenario,
    validate_manifest,
)
from .store import (
    EmbeddingStore,
    RowMeta,
    StoreFormatError,
    detect_format,
    load_store,
    save_store,
    select_by_datasets,
)

__version__ = "0.1.0"

__all__ = [
    "APPROACHES",
    "CentroidModel",
    "ConfusionCounts",
    "EmbeddingStore",
    "EvaluationReport",
    "FirstNeighborTable",
    "ID",
    "LinearHead",
    "ManifestError",
    "ModelFormatError",
    "OOD",
    "Partition",
    "PartitionHierarchy",
    "RowMeta",
    "ScenarioManifest",
    "StoreFormatError",
    "TrainConfig",
    "TrainingError",
    "Violation",
    "adjacency_partition",
    "baccu",
    "bundled_manifest",
    "count_confusion",
    "detect_format",
    "evaluate_with_model",
    "finch",
    "first_neighbors",
    "fit_linear_head",
    "fit_ncm",
    "fit_ncm_finch",
    "load_manifest",
    "load_model",
    "load_store",
    "predict_centroid",
    "predict_centroid_batch",
    "predict_linear",
    "predict_linear_batch",
    "render_report_table",
    "run_scenario",
    "save_model",
    "save_store",
    "select_by_datasets",
    "select_partition",
    "swish",
    "validate_manifest",
]
