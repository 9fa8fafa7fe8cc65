"""Writers for the scorelab matrix container formats.

PMAT (little-endian): magic b"PMAT", version u16 (1), N u64, K u32, then
N*K float64 row-major. CSV: "class_0,...,class_{K-1}" header and one row
per line with 17-significant-digit floats. These match the consumer's
published layout byte for byte; the toolkit itself is not imported.
"""

from __future__ import annotations

import os
import struct

import numpy as np

PMAT_MAGIC = b"PMAT"
PMAT_VERSION = 1
_PMAT_HEADER = struct.Struct("<4sHQI")


def write_pmat(rows: np.ndarray, path: str | os.PathLike) -> None:
    n, k = rows.shape
    with open(path, "wb") as f:
        f.write(_PMAT_HEADER.pack(PMAT_MAGIC, PMAT_VERSION, n, k))
        f.write(np.ascontiguousarray(rows, dtype="<f8").tobytes())


def write_csv(rows: np.ndarray, path: str | os.PathLike) -> None:
    _, k = rows.shape
    with open(path, "w") as f:
        f.write(",".join(f"class_{i}" for i in range(k)) + "\n")
        for row in rows:
            f.write(",".join(f"{v:.17g}" for v in row) + "\n")


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def file_digest(path: str | os.PathLike) -> str:
    with open(path, "rb") as f:
        return f"{fnv1a64(f.read()):016x}"
