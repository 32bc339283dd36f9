"""Bit-exact binary container for dense feature tensors.

Layout (all multi-byte integers little-endian):

    magic   4 bytes  0x48 0x53 0x4E 0x46 ("HSNF")
    version u16      currently 1
    prec    u8       0 = 32-bit floats, 1 = 64-bit floats
    ndim    u8       1..4
    extents ndim*u32
    payload row-major floats, product(extents) elements

Arrays are widened to float64 on load regardless of stored precision.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import CorruptFileError, InputError

MAGIC = b"HSNF"
VERSION = 1
MAX_NDIM = 4

_PRECISIONS = {0: np.dtype("<f4"), 1: np.dtype("<f8")}


def write_feature(path, array, precision: str = "f64") -> None:
    """Write `array` to `path` in the feature-container layout."""
    arr = np.asarray(array)
    if arr.ndim < 1 or arr.ndim > MAX_NDIM:
        raise InputError(f"feature files carry 1..{MAX_NDIM} dimensions, got {arr.ndim}")
    if any(e <= 0 for e in arr.shape):
        raise InputError(f"feature extents must be positive, got {arr.shape}")
    if precision == "f32":
        tag, dtype = 0, _PRECISIONS[0]
    elif precision == "f64":
        tag, dtype = 1, _PRECISIONS[1]
    else:
        raise InputError(f"unknown precision {precision!r}")
    header = MAGIC + struct.pack("<HBB", VERSION, tag, arr.ndim)
    header += struct.pack(f"<{arr.ndim}I", *arr.shape)
    Path(path).write_bytes(header + np.ascontiguousarray(arr, dtype=dtype).tobytes())


def read_feature(path) -> np.ndarray:
    """Read a feature container, validating the header, as float64."""
    raw = Path(path).read_bytes()
    if len(raw) < 8:
        raise CorruptFileError(f"{path}: truncated header")
    if raw[:4] != MAGIC:
        raise CorruptFileError(f"{path}: bad magic {raw[:4]!r}")
    version, tag, ndim = struct.unpack("<HBB", raw[4:8])
    if version != VERSION:
        raise CorruptFileError(f"{path}: unsupported version {version}")
    if tag not in _PRECISIONS:
        raise CorruptFileError(f"{path}: unknown precision tag {tag}")
    if ndim < 1 or ndim > MAX_NDIM:
        raise CorruptFileError(f"{path}: dimension count {ndim} outside 1..{MAX_NDIM}")
    header_size = 8 + 4 * ndim
    if len(raw) < header_size:
        raise CorruptFileError(f"{path}: truncated extent table")
    extents = struct.unpack(f"<{ndim}I", raw[8:header_size])
    dtype = _PRECISIONS[tag]
    expected = int(np.prod(extents)) * dtype.itemsize
    if len(raw) - header_size != expected:
        raise CorruptFileError(
            f"{path}: payload is {len(raw) - header_size} bytes, expected {expected}"
        )
    values = np.frombuffer(raw, dtype=dtype, offset=header_size)
    return values.reshape(extents).astype(np.float64)
