"""Image loading/saving: 8-bit RGB files <-> H x W x 3 uint8 buffers."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ParseError


def load_image(path) -> np.ndarray:
    path = Path(path)
    try:
        with Image.open(path) as img:
            rgb = img.convert("RGB")
            return np.asarray(rgb, dtype=np.uint8)
    except (OSError, ValueError) as exc:
        raise ParseError(f"cannot decode image {path}: {exc}") from exc


def save_image(buffer: np.ndarray, path) -> None:
    arr = np.asarray(buffer)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.dtype != np.uint8:
        raise ParseError(f"expected H x W x 3 uint8 buffer, got {arr.shape} {arr.dtype}")
    Image.fromarray(arr, mode="RGB").save(Path(path))
