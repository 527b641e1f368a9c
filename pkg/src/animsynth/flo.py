"""Middlebury .flo container: bit-exact reader and writer.

Layout: 4-byte magic (the little-endian float 202021.25, spelling
"PIEH"), int32 width, int32 height, then width*height interleaved (u, v)
float32 pairs, row-major, all little-endian.
"""

from __future__ import annotations

import struct
from typing import BinaryIO

import numpy as np

FLO_MAGIC = 202021.25
_HEADER = struct.Struct("<fii")


class FloFormatError(ValueError):
    pass


def write_flo(flow: np.ndarray, sink: BinaryIO) -> int:
    """Serialize an (H, W, 2) flow field; returns the byte count written."""
    flow = np.asarray(flow)
    if flow.ndim != 3 or flow.shape[2] != 2:
        raise ValueError(f"flow must be (H, W, 2), got {flow.shape}")
    h, w = flow.shape[:2]
    payload = np.ascontiguousarray(flow, dtype="<f4").tobytes()
    sink.write(_HEADER.pack(FLO_MAGIC, w, h))
    sink.write(payload)
    return _HEADER.size + len(payload)


def read_flo(source: BinaryIO) -> np.ndarray:
    """Parse a .flo stream into an (H, W, 2) float32 array."""
    header = source.read(_HEADER.size)
    if len(header) < _HEADER.size:
        raise FloFormatError("truncated header")
    magic, w, h = _HEADER.unpack(header)
    if magic != FLO_MAGIC:
        raise FloFormatError(f"bad magic {magic!r}, expected {FLO_MAGIC}")
    if w < 1 or h < 1:
        raise FloFormatError(f"invalid dimensions {w}x{h}")
    expect = 8 * w * h
    payload = source.read(expect)
    if len(payload) != expect:
        raise FloFormatError(f"payload holds {len(payload)} bytes, header implies {expect}")
    return np.frombuffer(payload, dtype="<f4").reshape(h, w, 2)
