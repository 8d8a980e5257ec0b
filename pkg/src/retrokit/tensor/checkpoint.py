"""Versioned binary checkpoints that restore parameters bit for bit.

Layout: 8-byte magic+version, 8-byte little-endian header length, a JSON
header describing entries and user metadata, then raw array bytes in
header order. No timestamps anywhere, so identical state produces an
identical file.
"""

from __future__ import annotations

import json
import struct
from typing import Any

import numpy as np

__all__ = ["save_checkpoint", "load_checkpoint"]

_MAGIC = b"RTKC\x00\x00\x00\x01"


def save_checkpoint(path: str, arrays: dict[str, np.ndarray],
                    meta: dict[str, Any] | None = None) -> None:
    entries = []
    blobs = []
    for name in sorted(arrays):
        arr = np.ascontiguousarray(arrays[name])
        entries.append({
            "name": name,
            "dtype": arr.dtype.str,      # includes byte order, e.g. "<f8"
            "shape": list(arr.shape),
        })
        blobs.append(arr.tobytes())
    header = json.dumps({"meta": meta or {}, "entries": entries},
                        sort_keys=True, separators=(",", ":")).encode()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        for blob in blobs:
            fh.write(blob)


def load_checkpoint(path: str) -> tuple[dict[str, np.ndarray], dict[str, Any]]:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _MAGIC:
            raise ValueError(f"{path}: not a checkpoint (bad magic {magic!r})")
        (hlen,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(hlen).decode())
        arrays = {}
        for ent in header["entries"]:
            dtype = np.dtype(ent["dtype"])
            shape = tuple(ent["shape"])
            count = int(np.prod(shape)) if shape else 1
            buf = fh.read(count * dtype.itemsize)
            arrays[ent["name"]] = np.frombuffer(buf, dtype=dtype).reshape(shape).copy()
    return arrays, header["meta"]
