"""Self-contained writer for the ANAF matrix container.

Layout: magic ``ANAF`` | version u16 | dtype u8 | rank u8 | one u32 per
dimension | row-major payload, all integers little-endian. Exports always
write dtype 0 (IEEE-754 single precision), which is what the classifier's
data loader expects for feature files. A small reader is included so the
exporter's own tests can verify files without the consumer installed.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"ANAF"
VERSION = 1
DTYPE_F32 = 0


def write_matrix(path, matrix) -> None:
    """Write a rank-2 real matrix as single-precision ANAF."""
    arr = np.ascontiguousarray(matrix, dtype="<f4")
    if arr.ndim != 2:
        raise ValueError(f"expected a rank-2 matrix, got shape {arr.shape}")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<HBB", VERSION, DTYPE_F32, arr.ndim))
        f.write(struct.pack("<II", arr.shape[0], arr.shape[1]))
        f.write(arr.tobytes())


def read_matrix(path) -> np.ndarray:
    """Read back a single-precision rank-2 ANAF file."""
    blob = Path(path).read_bytes()
    if blob[:4] != MAGIC:
        raise ValueError(f"bad magic {blob[:4]!r} in {path}")
    version, dtype_code, rank = struct.unpack("<HBB", blob[4:8])
    if (version, dtype_code, rank) != (VERSION, DTYPE_F32, 2):
        raise ValueError(
            f"unsupported header (version={version}, dtype={dtype_code}, "
            f"rank={rank}) in {path}"
        )
    rows, cols = struct.unpack("<II", blob[8:16])
    payload = np.frombuffer(blob, dtype="<f4", offset=16, count=rows * cols)
    return payload.reshape(rows, cols).copy()
