"""On-disk output formats consumed by the main toolkit.

The FVEC layout is a fixed external contract: magic ``R2SF``, u32
little-endian version (= 1), u32 N, u32 D, then N*D float32 little-endian
values row-major.  The row-to-image mapping goes to ``<name>.ids.json``
(``.fvec`` extension replaced), a bare JSON array of N strings.  Anything
else this helper wants to record (preprocessing, backbone variant, skipped
rows) goes to separate ``.meta.json`` / ``.errors.json`` sidecars that the
main toolkit never reads.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"R2SF"
VERSION = 1
_HEADER = struct.Struct("<4sIII")


def ids_path(path) -> Path:
    path = Path(path)
    if path.suffix == ".fvec":
        return path.with_suffix(".ids.json")
    return path.with_name(path.name + ".ids.json")


def meta_path(path) -> Path:
    path = Path(path)
    if path.suffix == ".fvec":
        return path.with_suffix(".meta.json")
    return path.with_name(path.name + ".meta.json")


def errors_path(path) -> Path:
    path = Path(path)
    if path.suffix == ".fvec":
        return path.with_suffix(".errors.json")
    return path.with_name(path.name + ".errors.json")


def write_fvec(path, features: np.ndarray, ids: list[str], meta: dict | None = None) -> None:
    """Write the feature matrix plus its ids (and optional meta) sidecars."""
    feats = np.ascontiguousarray(features, dtype="<f4")
    if feats.ndim != 2:
        raise ValueError(f"features must be 2-D, got shape {feats.shape}")
    n, d = feats.shape
    if n != len(ids):
        raise ValueError(f"row count {n} != id count {len(ids)}")
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, n, d))
        fh.write(feats.tobytes())
    ids_path(path).write_text(json.dumps(list(ids), ensure_ascii=False) + "\n", encoding="utf-8")
    if meta is not None:
        meta_path(path).write_text(
            json.dumps(meta, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )


def write_errors(path, errors: dict[str, str]) -> None:
    errors_path(path).write_text(
        json.dumps(errors, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def write_lpips_csv(path, rows: list[tuple[str, float]]) -> None:
    """Per-pair CSV with the exact header the main toolkit ingests."""
    lines = ["image_id,lpips"] + [f"{image_id},{value!r}" for image_id, value in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
