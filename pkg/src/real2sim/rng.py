"""Deterministic per-item random streams for parallel pipelines.

Every consumer of randomness derives its own stream from a 64-bit FNV-1a
hash of ``"{global_seed}:{item_id}:{epoch}:{stage}"`` feeding a
counter-based Philox generator.  Streams therefore depend only on the
identifiers, never on evaluation order or worker count, and the derivation
is part of the stable on-disk contract.
"""

from __future__ import annotations

import numpy as np

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes | str) -> int:
    """64-bit FNV-1a hash."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    value = _FNV_OFFSET
    for byte in data:
        value ^= byte
        value = (value * _FNV_PRIME) & _MASK64
    return value


def stream_key(global_seed: int, item_id: str, epoch: int, stage: str) -> int:
    return fnv1a64(f"{global_seed}:{item_id}:{epoch}:{stage}")


def stream(global_seed: int, item_id: str, epoch: int, stage: str) -> np.random.Generator:
    """Counter-based generator for one (seed, item, epoch, stage) tuple."""
    key = stream_key(global_seed, item_id, epoch, stage)
    return np.random.Generator(np.random.Philox(key=key))
