"""TFEA container: the wire format shared with the scoring toolchain.

Layout (little-endian): 4-byte magic "TFEA", uint32 version (1), uint64 n,
uint64 d, one dtype byte (0x01 = float32), 7 reserved zero bytes, then
n*d row-major float32 values, then an optional provenance trailer of a
uint32 byte length followed by UTF-8 text.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"TFEA"
VERSION = 1
DTYPE_FLOAT32 = 0x01
_HEADER = struct.Struct("<4sIQQB7s")
_TRAILER_LEN = struct.Struct("<I")


def write_tfea(values: np.ndarray, path, tag: str = "") -> None:
    """Write an n x d float32 matrix; byte output is deterministic."""
    arr = np.ascontiguousarray(values, dtype="<f4")
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"expected a nonempty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("refusing to write non-finite feature values")
    n, d = arr.shape
    chunks = [_HEADER.pack(MAGIC, VERSION, n, d, DTYPE_FLOAT32, b"\0" * 7), arr.tobytes()]
    if tag:
        encoded = tag.encode("utf-8")
        chunks.append(_TRAILER_LEN.pack(len(encoded)))
        chunks.append(encoded)
    Path(path).write_bytes(b"".join(chunks))


def read_tfea(path) -> tuple[np.ndarray, str]:
    """Read back (values, tag), validating the envelope."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError("file shorter than the TFEA header")
    magic, version, n, d, dtype_code, reserved = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError("bad magic bytes")
    if version != VERSION:
        raise ValueError(f"unsupported version {version}")
    if dtype_code != DTYPE_FLOAT32 or reserved != b"\0" * 7:
        raise ValueError("unexpected dtype code or reserved bytes")
    need = n * d * 4
    body = data[_HEADER.size:]
    if len(body) < need:
        raise ValueError(f"payload truncated: {len(body)} < {need} bytes")
    values = np.frombuffer(body, dtype="<f4", count=n * d).reshape(n, d).copy()
    rest = body[need:]
    tag = ""
    if rest:
        (tag_len,) = _TRAILER_LEN.unpack_from(rest)
        tag_bytes = rest[_TRAILER_LEN.size:]
        if len(tag_bytes) != tag_len:
            raise ValueError("trailer length mismatch")
        tag = tag_bytes.decode("utf-8")
    if not np.all(np.isfinite(values)):
        raise ValueError("non-finite values in payload")
    return values, tag
