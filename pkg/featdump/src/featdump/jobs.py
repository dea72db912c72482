"""Dump jobs: collect images, run the backbone, export FVEC / LPIPS files."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .backbone import backbone_metadata, extract_features, perceptual_distance
from .formats import write_errors, write_fvec, write_lpips_csv

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


@dataclass(frozen=True)
class DumpJob:
    source: str  # image directory or scene-manifest JSON path
    output: str  # FVEC output path
    batch_size: int = 8
    device: str = "cpu"

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


def load_image(path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"), dtype=np.uint8)


def collect_image_ids(source) -> tuple[Path, list[str]]:
    """Image ids (relative paths) in lexicographic order, plus their root.

    A directory is scanned recursively; a file is read as a scene-manifest
    JSON document and contributes every frame's image paths, resolved
    relative to the manifest's directory.
    """
    source = Path(source)
    if source.is_dir():
        ids = sorted(
            str(p.relative_to(source)).replace("\\", "/")
            for p in source.rglob("*")
            if p.suffix.lower() in IMAGE_SUFFIXES
        )
        return source, ids
    doc = json.loads(source.read_text(encoding="utf-8"))
    ids = sorted(
        {path for frame in doc.get("frames", []) for path in (frame.get("images") or {}).values()}
    )
    return source.parent, ids


def dump_features(job: DumpJob) -> tuple[list[str], dict[str, str]]:
    """Export pooled features for every readable image under the job source.

    Returns (row ids, errors).  Row order is lexicographic by image id;
    unreadable images are recorded in the errors sidecar and skipped without
    disturbing the order of the remaining rows.
    """
    root, ids = collect_image_ids(job.source)
    kept_ids: list[str] = []
    images: list[np.ndarray] = []
    errors: dict[str, str] = {}
    for image_id in ids:
        try:
            images.append(load_image(root / image_id))
            kept_ids.append(image_id)
        except Exception as exc:
            errors[image_id] = str(exc)

    features = extract_features(images, batch_size=job.batch_size, device=job.device)
    write_fvec(job.output, features, kept_ids, meta=backbone_metadata())
    if errors:
        write_errors(job.output, errors)
    return kept_ids, errors


def dump_lpips(
    pairs: list[tuple[str, str, str]],
    output,
    device: str = "cpu",
) -> tuple[list[tuple[str, float]], dict[str, str]]:
    """Export the per-pair perceptual distances as ``image_id,lpips`` CSV.

    ``pairs`` holds (real path, rendered path, image_id) triples; rows keep
    the input order, unreadable or mismatched pairs are recorded in the
    errors sidecar and skipped.
    """
    rows: list[tuple[str, float]] = []
    errors: dict[str, str] = {}
    for real_path, rendered_path, image_id in pairs:
        try:
            value = perceptual_distance(
                load_image(real_path), load_image(rendered_path), device=device
            )
            rows.append((image_id, value))
        except Exception as exc:
            errors[image_id] = str(exc)
    write_lpips_csv(output, rows)
    if errors:
        write_errors(output, errors)
    return rows, errors


def load_pairs_spec(path) -> list[tuple[str, str, str]]:
    """Parse the pairs JSON: [{"real": ..., "rendered": ..., "image_id": ...}]."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    pairs = []
    for i, entry in enumerate(doc):
        try:
            pairs.append((entry["real"], entry["rendered"], entry["image_id"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"pairs entry {i} malformed: {exc!r}") from exc
    return pairs
