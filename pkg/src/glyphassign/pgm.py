"""Minimal PGM (P2 ASCII / P5 binary) reading and writing."""
from __future__ import annotations

import os

import numpy as np


class PGMError(ValueError):
    pass


def _tokens(data: bytes, count: int, pos: int):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    out = []
    n = len(data)
    while len(out) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise PGMError("truncated PGM header")
        out.append(data[start:pos])
    return out, pos


def read_pgm(path) -> np.ndarray:
    """Return intensities in [0, 1] as a float64 (height, width) array."""
    with open(path, "rb") as fh:
        data = fh.read()
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise PGMError(f"{path}: not a P2/P5 PGM file")
    (w, h, maxval), pos = _tokens(data, 3, 2)
    try:
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError as exc:
        raise PGMError(f"{path}: bad header") from exc
    if w < 1 or h < 1 or not 0 < maxval < 65536:
        raise PGMError(f"{path}: bad dimensions or maxval")
    if magic == b"P5":
        pos += 1  # single whitespace byte before the raster
        dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
        size = w * h * np.dtype(dtype).itemsize
        raster = data[pos:pos + size]
        if len(raster) != size:
            raise PGMError(f"{path}: raster truncated")
        arr = np.frombuffer(raster, dtype=dtype).reshape(h, w)
    else:
        vals, _ = _tokens(data, w * h, pos)
        arr = np.array([int(v) for v in vals], dtype=np.int64).reshape(h, w)
    if arr.max(initial=0) > maxval:
        raise PGMError(f"{path}: sample exceeds maxval")
    return arr.astype(np.float64) / maxval


def write_pgm(path, pixels, binary: bool = True) -> None:
    """Write [0, 1] intensities as an 8-bit PGM."""
    arr = np.asarray(pixels, dtype=np.float64)
    if arr.ndim != 2:
        raise PGMError("PGM needs a 2-D array")
    q = np.rint(np.clip(arr, 0.0, 1.0) * 255.0).astype(np.uint8)
    h, w = q.shape
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "wb") as fh:
        if binary:
            fh.write(b"P5\n%d %d\n255\n" % (w, h))
            fh.write(q.tobytes())
        else:
            fh.write(b"P2\n%d %d\n255\n" % (w, h))
            for row in q:
                fh.write(" ".join(str(int(v)) for v in row).encode("ascii") + b"\n")
