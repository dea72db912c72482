"""Bit-exact FVEC feature file reader/writer.

Layout: magic ``R2SF`` (4 bytes), u32 little-endian version (=1), u32 N,
u32 D, then N*D float32 little-endian values row-major.  The row-to-image
mapping lives in a sidecar ``<name>.ids.json`` next to the file (``.fvec``
extension replaced): a JSON array of N image-identifier strings.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError, ParseError, TruncationError
from .types import FeatureSet

MAGIC = b"R2SF"
VERSION = 1
_HEADER = struct.Struct("<4sIII")


def ids_sidecar_path(path) -> Path:
    path = Path(path)
    if path.suffix == ".fvec":
        return path.with_suffix(".ids.json")
    return path.with_name(path.name + ".ids.json")


def load_feature_set(path) -> FeatureSet:
    """Load an FVEC file and its ids sidecar into a validated FeatureSet."""
    path = Path(path)
    data = path.read_bytes()
    if len(data) < _HEADER.size:
        raise TruncationError(f"{path}: file shorter than the 16-byte header")
    magic, version, n, d = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    expected = n * d * 4
    payload = data[_HEADER.size:]
    if len(payload) < expected:
        raise TruncationError(
            f"{path}: payload has {len(payload)} bytes, header promises {expected}"
        )
    if len(payload) > expected:
        raise FormatError(f"{path}: {len(payload) - expected} trailing bytes after payload")
    features = np.frombuffer(payload, dtype="<f4").reshape(n, d).astype(np.float32)

    sidecar = ids_sidecar_path(path)
    try:
        ids = json.loads(sidecar.read_text(encoding="utf-8"))
    except OSError as exc:
        raise FormatError(f"missing ids sidecar {sidecar}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{sidecar} is not valid JSON: {exc}") from exc
    if not isinstance(ids, list) or not all(isinstance(i, str) for i in ids):
        raise ParseError(f"{sidecar} must be a JSON array of strings")
    return FeatureSet(features, ids)


def save_feature_set(feature_set: FeatureSet, path) -> None:
    """Write an FVEC file plus its ids sidecar."""
    path = Path(path)
    feats = np.ascontiguousarray(feature_set.features, dtype="<f4")
    n, d = feats.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, n, d))
        fh.write(feats.tobytes())
    ids_sidecar_path(path).write_text(
        json.dumps(list(feature_set.ids), ensure_ascii=False) + "\n", encoding="utf-8"
    )
