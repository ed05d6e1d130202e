"""Frozen-backbone image feature extraction into EMB1 stores."""

from .backbones import BACKBONES, UnknownBackboneError, build_backbone
from .emb1 import Emb1FormatError, StoreSummary, verify_store, write_store
from .extract import ExtractionJob, ExtractionResult, extract, list_images

__version__ = "0.1.0"

__all__ = [
    "BACKBONES",
    "Emb1FormatError",
    "ExtractionJob",
    "ExtractionResult",
    "StoreSummary",
    "UnknownBackboneError",
    "build_backbone",
    "extract",
    "list_images",
    "verify_store",
    "write_store",
]
