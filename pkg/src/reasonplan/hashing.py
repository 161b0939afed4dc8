"""64-bit FNV-1a hashing and canonical JSON used for all reproducibility checks."""

from __future__ import annotations

import json
from pathlib import Path

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes, h: int = FNV_OFFSET) -> int:
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & _MASK
    return h


def fnv1a64_hex(data: bytes) -> str:
    return f"{fnv1a64(data):016x}"


def file_hash(path) -> str:
    return fnv1a64_hex(Path(path).read_bytes())


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, compact separators, repr floats."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)
