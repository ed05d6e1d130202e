from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
from PIL import Image


def write_noise_image(path: Path, seed: int, size=(48, 48)) -> None:
    rng = np.random.default_rng(seed)
    pixels = rng.integers(0, 256, size=(size[1], size[0], 3), dtype=np.uint8)
    Image.fromarray(pixels, "RGB").save(path)


@pytest.fixture
def toy_folder(tmp_path):
    """10 images split over 3 class subfolders."""
    root = tmp_path / "ToySet"
    census = {"alpha": 4, "beta": 3, "gamma": 3}
    seed = 0
    for label, count in census.items():
        (root / label).mkdir(parents=True)
        for i in range(count):
            write_noise_image(root / label / f"img_{i}.png", seed)
            seed += 1
    return root, census
