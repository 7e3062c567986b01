"""Feature-matrix container and the TFEA on-disk format.

TFEA layout (little-endian):

    bytes 0-3    magic "TFEA"
    bytes 4-7    version, unsigned 32-bit (currently 1)
    bytes 8-15   n, unsigned 64-bit
    bytes 16-23  d, unsigned 64-bit
    byte  24     dtype code (0x01 = IEEE-754 float32)
    bytes 25-31  reserved, zero
    then         n*d float32 values, row-major
    then         optional provenance trailer: unsigned 32-bit byte length
                 followed by that many bytes of UTF-8 text

Values are stored in 32 bits; the numerics elsewhere promote to 64-bit on
entry.  Headerless delimiter-separated text (one row per line, whitespace
or commas, '#' comments allowed) is also accepted for hand-made fixtures.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "FeatureFileError",
    "FeatureMatrix",
    "MalformedHeaderError",
    "NonFiniteValuesError",
    "TruncatedPayloadError",
    "UnsupportedVersionError",
    "read_feature_file",
    "subsample",
    "write_feature_file",
]

MAGIC = b"TFEA"
VERSION = 1
DTYPE_FLOAT32 = 0x01
_HEADER = struct.Struct("<4sIQQB7s")
_TRAILER_LEN = struct.Struct("<I")


class FeatureFileError(Exception):
    """Base class for feature-file problems."""


class MalformedHeaderError(FeatureFileError):
    """Bad magic, dtype code, reserved bytes, or file structure."""


class UnsupportedVersionError(FeatureFileError):
    """Version field is not one this reader understands."""


class TruncatedPayloadError(FeatureFileError):
    """Fewer bytes than the header promises."""


class NonFiniteValuesError(FeatureFileError):
    """NaN or infinite values in the payload."""


@dataclass(frozen=True)
class FeatureMatrix:
    """n x d matrix of embedding values, one row per sample.

    Stored as float32 (the storage dtype), validated finite.  Values above
    float32 range are rejected rather than silently saturated.
    """

    values: np.ndarray
    tag: str = ""

    def __post_init__(self):
        arr = np.asarray(self.values)
        if arr.ndim != 2:
            raise ValueError(f"feature matrix must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"feature matrix must be nonempty, got shape {arr.shape}")
        with np.errstate(over="ignore"):
            arr = np.ascontiguousarray(arr, dtype=np.float32)
        if not np.all(np.isfinite(arr)):
            raise NonFiniteValuesError("feature matrix contains NaN or non-float32-representable values")
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "tag", str(self.tag))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


def write_feature_file(m: FeatureMatrix, path) -> None:
    """Serialize to TFEA; byte-deterministic for identical input."""
    header = _HEADER.pack(MAGIC, VERSION, m.n, m.d, DTYPE_FLOAT32, b"\0" * 7)
    payload = np.ascontiguousarray(m.values, dtype="<f4").tobytes()
    chunks = [header, payload]
    if m.tag:
        encoded = m.tag.encode("utf-8")
        chunks.append(_TRAILER_LEN.pack(len(encoded)))
        chunks.append(encoded)
    Path(path).write_bytes(b"".join(chunks))


def read_feature_file(path) -> FeatureMatrix:
    """Read a TFEA file, or headerless delimiter-separated text.

    Distinct errors for a malformed header, an unsupported version, a
    payload shorter than the header promises, and non-finite values.
    """
    data = Path(path).read_bytes()
    if data[:4] == MAGIC:
        return _parse_binary(data)
    return _parse_text(data, path)


def _parse_binary(data: bytes) -> FeatureMatrix:
    if len(data) < _HEADER.size:
        raise MalformedHeaderError("file shorter than the 32-byte TFEA header")
    magic, version, n, d, dtype_code, reserved = _HEADER.unpack_from(data)
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported TFEA version {version}")
    if dtype_code != DTYPE_FLOAT32:
        raise MalformedHeaderError(f"unknown dtype code {dtype_code:#04x}")
    if reserved != b"\0" * 7:
        raise MalformedHeaderError("reserved header bytes are not zero")
    if n < 1 or d < 1:
        raise MalformedHeaderError(f"header declares empty matrix ({n} x {d})")
    need = n * d * 4
    body = data[_HEADER.size:]
    if len(body) < need:
        raise TruncatedPayloadError(
            f"payload holds {len(body)} bytes, header promises {need}"
        )
    values = np.frombuffer(body, dtype="<f4", count=n * d).reshape(n, d).copy()
    rest = body[need:]
    tag = ""
    if rest:
        if len(rest) < _TRAILER_LEN.size:
            raise TruncatedPayloadError("provenance trailer length field truncated")
        (tag_len,) = _TRAILER_LEN.unpack_from(rest)
        tag_bytes = rest[_TRAILER_LEN.size:]
        if len(tag_bytes) < tag_len:
            raise TruncatedPayloadError(
                f"provenance trailer holds {len(tag_bytes)} bytes, expected {tag_len}"
            )
        if len(tag_bytes) > tag_len:
            raise MalformedHeaderError("unexpected bytes after the provenance trailer")
        try:
            tag = tag_bytes.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedHeaderError(f"provenance trailer is not UTF-8: {exc}") from exc
    return FeatureMatrix(values, tag)


def _parse_text(data: bytes, path) -> FeatureMatrix:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        raise MalformedHeaderError(
            f"{path}: neither a TFEA file nor UTF-8 text"
        ) from None
    rows: list[list[float]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.replace(",", " ").split()
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise MalformedHeaderError(f"{path}:{lineno}: unparseable row {stripped!r}") from None
    if not rows:
        raise MalformedHeaderError(f"{path}: no data rows found")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise MalformedHeaderError(f"{path}: rows have inconsistent column counts")
    if not all(math.isfinite(v) for row in rows for v in row):
        raise NonFiniteValuesError(f"{path}: non-finite values in text data")
    return FeatureMatrix(np.array(rows, dtype=np.float64))


def subsample(m: FeatureMatrix, fraction: float, seed) -> FeatureMatrix:
    """Keep floor(fraction * n) rows, drawn without replacement.

    Selected rows keep their original order, so fraction=1 returns the
    matrix unchanged.  Deterministic for a given seed.
    """
    fraction = float(fraction)
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    keep = int(math.floor(fraction * m.n))
    if keep < 1:
        raise ValueError(f"subsample of {m.n} rows at fraction {fraction} is empty")
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(m.n, size=keep, replace=False))
    return FeatureMatrix(m.values[idx], m.tag)
