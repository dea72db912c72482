from __future__ import annotations

import numpy as np
import pytest
from PIL import Image, ImageFilter


def structured_image(seed: int, size: int = 96) -> np.ndarray:
    """Blobs and an edge: enough structure for feature models to react to."""
    rng = np.random.default_rng(seed)
    canvas = np.zeros((size, size, 3), dtype=np.float64)
    yy, xx = np.mgrid[0:size, 0:size]
    for _ in range(5):
        cy, cx = rng.uniform(5, size - 5, 2)
        radius = rng.uniform(5, size / 4)
        mask = ((yy - cy) ** 2 + (xx - cx) ** 2) < radius**2
        canvas[mask] += rng.uniform(30, 80, 3)
    canvas[:, size // 2 :] += 40
    return np.clip(canvas, 0, 255).astype(np.uint8)


def blurred(img: np.ndarray, radius: float) -> np.ndarray:
    pil = Image.fromarray(img, mode="RGB").filter(ImageFilter.GaussianBlur(radius))
    return np.asarray(pil, dtype=np.uint8)


def save_png(img: np.ndarray, path) -> None:
    Image.fromarray(img, mode="RGB").save(path)


@pytest.fixture
def image_dir(tmp_path):
    root = tmp_path / "images"
    (root / "cam_b").mkdir(parents=True)
    (root / "cam_a").mkdir(parents=True)
    save_png(structured_image(1), root / "cam_b" / "frame1.png")
    save_png(structured_image(2), root / "cam_a" / "frame2.png")
    save_png(structured_image(3), root / "cam_a" / "frame1.png")
    return root
