"""LXFV binary feature files: one float32 matrix per file.

Layout: magic "LXFV", version as uint16 LE (=1), row count and dim as
uint32 LE, then row-major float32 LE payload. One file per word.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import BadMagic, CountMismatch, NonFiniteValue

MAGIC = b"LXFV"
VERSION = 1
_HEADER = struct.Struct("<4sHII")


def encode(matrix) -> bytes:
    m = np.ascontiguousarray(matrix, dtype=np.float32)
    if m.ndim != 2:
        raise CountMismatch(f"expected a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteValue("refusing to write non-finite feature values")
    header = _HEADER.pack(MAGIC, VERSION, m.shape[0], m.shape[1])
    return header + m.astype("<f4").tobytes()


def decode(data: bytes) -> np.ndarray:
    if len(data) < _HEADER.size:
        raise BadMagic(f"file too short for an LXFV header ({len(data)} bytes)")
    magic, version, rows, dim = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BadMagic(f"bad magic {magic!r}")
    if version != VERSION:
        raise BadMagic(f"unsupported LXFV version {version}")
    payload = data[_HEADER.size:]
    expected = rows * dim * 4
    if len(payload) != expected:
        raise CountMismatch(
            f"payload is {len(payload)} bytes, header promises {expected}")
    values = np.frombuffer(payload, dtype="<f4").astype(np.float64).reshape(rows, dim)
    if not np.all(np.isfinite(values)):
        raise NonFiniteValue("non-finite value in LXFV payload")
    return values


def read(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return decode(fh.read())


def write(path, matrix):
    data = encode(matrix)
    with open(path, "wb") as fh:
        fh.write(data)
