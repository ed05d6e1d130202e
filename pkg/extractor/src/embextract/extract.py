"""Run a frozen backbone over a class-per-subfolder image tree and write EMB1.

Rows carry the subfolder name as class_label and the input folder's
basename as dataset_name; sample ids are paths relative to the input root.
Extraction is deterministic: eval mode, no augmentation, fixed per-backbone
resize and normalization.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from PIL import Image, UnidentifiedImageError

from .backbones import build_backbone
from .emb1 import write_store

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = {".jpg", ".jpeg", ".png", ".bmp", ".gif", ".webp", ".tif", ".tiff"}


@dataclass
class ExtractionJob:
    backbone: str
    input_dir: Path
    output_path: Path
    batch_size: int = 16
    device: str = "cpu"
    pretrained: bool = True
    seed: int = 0  # weight init when pretrained is off

    def __post_init__(self):
        self.input_dir = Path(self.input_dir)
        self.output_path = Path(self.output_path)
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")


@dataclass
class ExtractionResult:
    n_rows: int
    n_dims: int
    skipped: int
    class_labels: list[str] = field(default_factory=list)


def list_images(input_dir: Path) -> list[tuple[str, Path]]:
    """(class_label, path) pairs, sorted for a reproducible row order."""
    pairs = []
    for class_dir in sorted(p for p in input_dir.iterdir() if p.is_dir()):
        for image_path in sorted(class_dir.iterdir()):
            if image_path.suffix.lower() in IMAGE_SUFFIXES:
                pairs.append((class_dir.name, image_path))
    return pairs


def extract(job: ExtractionJob) -> ExtractionResult:
    if not job.input_dir.is_dir():
        raise FileNotFoundError(f"input folder {job.input_dir} does not exist")
    pairs = list_images(job.input_dir)
    if not pairs:
        raise ValueError(f"no images found under {job.input_dir} (one subfolder per class)")

    model, transforms = build_backbone(job.backbone, job.pretrained, job.seed)
    device = torch.device(job.device)
    model.to(device)

    dataset_name = job.input_dir.name
    batches: list[np.ndarray] = []
    sample_ids: list[str] = []
    class_labels: list[str] = []
    pending: list[torch.Tensor] = []
    skipped = 0

    def flush() -> None:
        if not pending:
            return
        with torch.no_grad():
            output = model(torch.stack(pending).to(device))
        batches.append(output.cpu().numpy().astype(np.float32))
        pending.clear()

    for class_label, image_path in pairs:
        try:
            with Image.open(image_path) as image:
                tensor = transforms(image.convert("RGB"))
        except (UnidentifiedImageError, OSError) as exc:
            log.warning("skipping undecodable image %s: %s", image_path, exc)
            skipped += 1
            continue
        pending.append(tensor)
        sample_ids.append(str(image_path.relative_to(job.input_dir)))
        class_labels.append(class_label)
        if len(pending) == job.batch_size:
            flush()
    flush()

    if skipped:
        log.warning("skipped %d undecodable image(s)", skipped)
    if not sample_ids:
        raise ValueError(f"every image under {job.input_dir} failed to decode")

    features = np.vstack(batches)
    write_store(job.output_path, features, sample_ids, class_labels, dataset_name)
    return ExtractionResult(
        n_rows=features.shape[0],
        n_dims=features.shape[1],
        skipped=skipped,
        class_labels=class_labels,
    )
