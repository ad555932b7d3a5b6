"""ANAF: little-endian binary container for dense real matrices.

Layout: magic ``ANAF`` | version u16 | dtype u8 | rank u8 | dims u32 each
| row-major payload. dtype 0 is IEEE-754 single (feature files), dtype 1
is double (model parameter files). All integers little-endian.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"ANAF"
VERSION = 1
DTYPE_F32 = 0
DTYPE_F64 = 1

_NP_DTYPES = {DTYPE_F32: np.dtype("<f4"), DTYPE_F64: np.dtype("<f8")}


class FormatError(ValueError):
    """Malformed ANAF data; carries the byte offset of the fault."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


def _read_exact(f, n: int) -> bytes:
    start = f.tell()
    buf = f.read(n)
    if len(buf) != n:
        raise FormatError(f"truncated: wanted {n} bytes, got {len(buf)}", start)
    return buf


def write_anaf(f, arr: np.ndarray, dtype_code: int = DTYPE_F32) -> None:
    """Write one tensor in ANAF framing to an open binary file."""
    arr = np.ascontiguousarray(arr)
    if arr.ndim > 3:
        raise ValueError(f"rank {arr.ndim} > 3 unsupported")
    np_dtype = _NP_DTYPES[dtype_code]
    f.write(MAGIC)
    f.write(struct.pack("<HBB", VERSION, dtype_code, arr.ndim))
    for dim in arr.shape:
        f.write(struct.pack("<I", dim))
    f.write(arr.astype(np_dtype, copy=False).tobytes())


def read_anaf(f) -> np.ndarray:
    """Read one ANAF-framed tensor from an open binary file."""
    start = f.tell()
    magic = _read_exact(f, 4)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}", start)
    version, dtype_code, rank = struct.unpack("<HBB", _read_exact(f, 4))
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", start + 4)
    if dtype_code not in _NP_DTYPES:
        raise FormatError(f"unknown dtype code {dtype_code}", start + 6)
    if rank > 3:
        raise FormatError(f"rank {rank} > 3", start + 7)
    dims = []
    for i in range(rank):
        (dim,) = struct.unpack("<I", _read_exact(f, 4))
        if dim < 1:
            raise FormatError(f"dimension {i} is {dim}, must be >= 1", start + 8 + 4 * i)
        dims.append(dim)
    np_dtype = _NP_DTYPES[dtype_code]
    count = int(np.prod(dims)) if dims else 1
    payload = _read_exact(f, count * np_dtype.itemsize)
    return np.frombuffer(payload, dtype=np_dtype).reshape(dims).copy()


def write_matrix(path, matrix) -> None:
    """Store a rank <= 2 real matrix as single-precision ANAF."""
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.ndim > 2:
        raise ValueError(f"write_matrix takes rank <= 2, got shape {arr.shape}")
    with open(path, "wb") as f:
        write_anaf(f, arr, DTYPE_F32)


def read_matrix(path) -> np.ndarray:
    """Load one ANAF tensor from ``path`` (single files hold exactly one)."""
    with open(path, "rb") as f:
        arr = read_anaf(f)
        trailing = f.read(1)
        if trailing:
            raise FormatError("trailing bytes after payload", f.tell() - 1)
    return arr
