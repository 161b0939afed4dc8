"""Versioned binary checkpoints: JSON header plus raw tensor bytes.

Save/load round-trips are bit-exact; readers reject unknown versions.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..autodiff import Tensor
from ..hashing import file_hash

MAGIC = b"RPCKPT"
VERSION = 1


def save_checkpoint(params: dict, meta: dict, path) -> str:
    names = sorted(params)
    header = {
        "version": VERSION,
        "meta": meta,
        "tensors": [
            {"name": n, "shape": list(np.shape(params[n].data if hasattr(params[n], "data")
                                               else params[n])),
             "dtype": "float64"}
            for n in names
        ],
    }
    blob = json.dumps(header, sort_keys=True).encode()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for n in names:
            arr = params[n].data if hasattr(params[n], "data") else params[n]
            fh.write(np.ascontiguousarray(arr, dtype=np.float64).tobytes())
    return file_hash(path)


def load_checkpoint(path, trainable: bool = True):
    """Returns (params dict of Tensors, meta dict)."""
    raw = Path(path).read_bytes()
    if raw[:len(MAGIC)] != MAGIC:
        raise ValueError(f"{path}: not a checkpoint file")
    (hlen,) = struct.unpack("<I", raw[len(MAGIC):len(MAGIC) + 4])
    header = json.loads(raw[len(MAGIC) + 4:len(MAGIC) + 4 + hlen])
    if header.get("version") != VERSION:
        raise ValueError(f"{path}: checkpoint version {header.get('version')} "
                         f"!= supported {VERSION}")
    off = len(MAGIC) + 4 + hlen
    params = {}
    for spec in header["tensors"]:
        shape = tuple(spec["shape"])
        count = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(raw, dtype=np.float64, count=count, offset=off).reshape(shape)
        off += count * 8
        params[spec["name"]] = Tensor(arr.copy(), requires_grad=trainable)
    return params, header["meta"]
