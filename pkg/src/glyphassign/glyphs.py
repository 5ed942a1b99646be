"""Glyph bitmaps, symbol pools, built-in generators and atlas loading."""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .pgm import PGMError, read_pgm


class AtlasError(ValueError):
    """Raised when an atlas manifest or one of its entries is unusable."""


@dataclass(frozen=True, eq=False)
class GlyphBitmap:
    """Row-major (height, width) grayscale intensities in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.array(self.pixels, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"glyph must be a non-empty 2-D array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("glyph intensities must lie in [0, 1]")
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def shape(self):
        return self.pixels.shape

    def equals(self, other: "GlyphBitmap") -> bool:
        return self.shape == other.shape and bool(np.array_equal(self.pixels, other.pixels))


@dataclass(frozen=True)
class SymbolEntry:
    family: str
    name: str
    glyph: GlyphBitmap

    @property
    def label(self) -> str:
        return f"{self.family}:{self.name}"


class SymbolPool:
    """Ordered, immutable collection of symbols; position is the pool index."""

    def __init__(self, entries: Iterable[SymbolEntry]):
        self.entries: tuple[SymbolEntry, ...] = tuple(entries)
        seen = set()
        shape = None
        for e in self.entries:
            key = (e.family, e.name)
            if key in seen:
                raise AtlasError(f"duplicate symbol {e.family}/{e.name}")
            seen.add(key)
            if shape is None:
                shape = e.glyph.shape
            elif e.glyph.shape != shape:
                raise AtlasError(
                    f"symbol {e.family}/{e.name} has shape {e.glyph.shape}, pool uses {shape}")
        self._index = {(e.family, e.name): i for i, e in enumerate(self.entries)}

    @classmethod
    def from_family(cls, family: str, names: Sequence[str], glyphs: Sequence[GlyphBitmap]):
        return cls(SymbolEntry(family, n, g) for n, g in zip(names, glyphs))

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i) -> SymbolEntry:
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)

    def __add__(self, other: "SymbolPool") -> "SymbolPool":
        return SymbolPool(self.entries + other.entries)

    @property
    def labels(self) -> list[str]:
        return [e.label for e in self.entries]

    @property
    def glyph_shape(self):
        return self.entries[0].glyph.shape if self.entries else None

    def families(self) -> list[str]:
        out = []
        for e in self.entries:
            if e.family not in out:
                out.append(e.family)
        return out

    def family_indices(self, family: str) -> list[int]:
        return [i for i, e in enumerate(self.entries) if e.family == family]

    def index_of(self, family: str, name: str) -> int:
        return self._index[(family, name)]

    def stack(self) -> np.ndarray:
        """All glyphs as one (S, height, width) array."""
        return np.stack([e.glyph.pixels for e in self.entries])


# ------------------------------------------------------------------ Braille

# Standard six-dot Braille for a-z.  Dots 1-3 run down the left column,
# dots 4-6 down the right column.
BRAILLE_DOTS = {
    "a": (1,), "b": (1, 2), "c": (1, 4), "d": (1, 4, 5), "e": (1, 5),
    "f": (1, 2, 4), "g": (1, 2, 4, 5), "h": (1, 2, 5), "i": (2, 4), "j": (2, 4, 5),
    "k": (1, 3), "l": (1, 2, 3), "m": (1, 3, 4), "n": (1, 3, 4, 5), "o": (1, 3, 5),
    "p": (1, 2, 3, 4), "q": (1, 2, 3, 4, 5), "r": (1, 2, 3, 5), "s": (2, 3, 4),
    "t": (2, 3, 4, 5), "u": (1, 3, 6), "v": (1, 2, 3, 6), "w": (2, 4, 5, 6),
    "x": (1, 3, 4, 6), "y": (1, 3, 4, 5, 6), "z": (1, 3, 5, 6),
}
LETTERS = "abcdefghijklmnopqrstuvwxyz"


def braille_dot_centers(size: int):
    """Pixel-coordinate (x, y) centre for each dot number 1..6."""
    pitch = size / 4.0
    c = (size - 1) / 2.0
    xs = (c - pitch / 2.0, c + pitch / 2.0)
    ys = (c - pitch, c, c + pitch)
    centers = {}
    for dot in range(1, 7):
        col, row = divmod(dot - 1, 3)
        centers[dot] = (xs[col], ys[row])
    return centers


def gen_braille(size: int = 64) -> list[GlyphBitmap]:
    """Binary Braille cells for a-z; discs of radius size/10 on a size/4 pitch."""
    if size < 8:
        raise ValueError("Braille glyphs need size >= 8")
    radius = size / 10.0
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    centers = braille_dot_centers(size)
    discs = {d: ((xx - cx) ** 2 + (yy - cy) ** 2 <= radius * radius) for d, (cx, cy) in centers.items()}
    out = []
    for letter in LETTERS:
        img = np.zeros((size, size))
        for d in BRAILLE_DOTS[letter]:
            img[discs[d]] = 1.0
        out.append(GlyphBitmap(img))
    return out


# ---------------------------------------------------------------------- DCT

def dct_indices(order: int = 6) -> list[tuple[int, int]]:
    """(u, v) pairs sorted by total frequency u+v, then by u."""
    return sorted(((u, v) for u in range(order) for v in range(order)), key=lambda p: (p[0] + p[1], p[0]))


def dct_raw(size: int, u: int, v: int) -> np.ndarray:
    """Unnormalized DCT-II basis; u varies along x (columns), v along y (rows)."""
    n = np.arange(size, dtype=np.float64)
    cx = np.cos(math.pi * u * (2.0 * n + 1.0) / (2.0 * size))
    cy = np.cos(math.pi * v * (2.0 * n + 1.0) / (2.0 * size))
    return np.outer(cy, cx)


def gen_dct(size: int = 64, order: int = 6) -> list[GlyphBitmap]:
    if not 1 <= order <= size:
        raise ValueError("need 1 <= order <= size")
    out = []
    for u, v in dct_indices(order):
        raw = dct_raw(size, u, v)
        out.append(GlyphBitmap(np.clip((raw + 1.0) / 2.0, 0.0, 1.0)))
    return out


def dct_names(order: int = 6) -> list[str]:
    return [f"u{u}v{v}" for u, v in dct_indices(order)]


# --------------------------------------------------------- dot-matrix Latin

DOTMATRIX_5X7 = {
    "A": ("01110", "10001", "10001", "11111", "10001", "10001", "10001"),
    "B": ("11110", "10001", "10001", "11110", "10001", "10001", "11110"),
    "C": ("01110", "10001", "10000", "10000", "10000", "10001", "01110"),
    "D": ("11100", "10010", "10001", "10001", "10001", "10010", "11100"),
    "E": ("11111", "10000", "10000", "11110", "10000", "10000", "11111"),
    "F": ("11111", "10000", "10000", "11110", "10000", "10000", "10000"),
    "G": ("01110", "10001", "10000", "10111", "10001", "10001", "01111"),
    "H": ("10001", "10001", "10001", "11111", "10001", "10001", "10001"),
    "I": ("01110", "00100", "00100", "00100", "00100", "00100", "01110"),
    "J": ("00111", "00010", "00010", "00010", "00010", "10010", "01100"),
    "K": ("10001", "10010", "10100", "11000", "10100", "10010", "10001"),
    "L": ("10000", "10000", "10000", "10000", "10000", "10000", "11111"),
    "M": ("10001", "11011", "10101", "10101", "10001", "10001", "10001"),
    "N": ("10001", "10001", "11001", "10101", "10011", "10001", "10001"),
    "O": ("01110", "10001", "10001", "10001", "10001", "10001", "01110"),
    "P": ("11110", "10001", "10001", "11110", "10000", "10000", "10000"),
    "Q": ("01110", "10001", "10001", "10001", "10101", "10010", "01101"),
    "R": ("11110", "10001", "10001", "11110", "10100", "10010", "10001"),
    "S": ("01111", "10000", "10000", "01110", "00001", "00001", "11110"),
    "T": ("11111", "00100", "00100", "00100", "00100", "00100", "00100"),
    "U": ("10001", "10001", "10001", "10001", "10001", "10001", "01110"),
    "V": ("10001", "10001", "10001", "10001", "10001", "01010", "00100"),
    "W": ("10001", "10001", "10001", "10101", "10101", "10101", "01010"),
    "X": ("10001", "10001", "01010", "00100", "01010", "10001", "10001"),
    "Y": ("10001", "10001", "10001", "01010", "00100", "00100", "00100"),
    "Z": ("11111", "00001", "00010", "00100", "01000", "10000", "11111"),
}


def gen_dotmatrix_latin(size: int = 64) -> list[GlyphBitmap]:
    """A-Z from the 5x7 table, each lit cell a filled square, centred."""
    if size < 16:
        raise ValueError("dot-matrix glyphs need size >= 16")
    cell = size // 8
    if (size - 5 * cell) % 2:
        cell -= 1  # keep horizontal margins equal so symmetric letters stay symmetric
    x0 = (size - 5 * cell) // 2
    y0 = (size - 7 * cell) // 2
    out = []
    for letter in LETTERS.upper():
        img = np.zeros((size, size))
        for r, row in enumerate(DOTMATRIX_5X7[letter]):
            for c, bit in enumerate(row):
                if bit == "1":
                    img[y0 + r * cell:y0 + (r + 1) * cell, x0 + c * cell:x0 + (c + 1) * cell] = 1.0
        out.append(GlyphBitmap(img))
    return out


# ------------------------------------------------------------------- pools

def braille_pool(size=64, family="braille") -> SymbolPool:
    return SymbolPool.from_family(family, list(LETTERS), gen_braille(size))


def dct_pool(size=64, order=6, family="dct") -> SymbolPool:
    return SymbolPool.from_family(family, dct_names(order), gen_dct(size, order))


def latin_pool(size=64, family="latin") -> SymbolPool:
    return SymbolPool.from_family(family, list(LETTERS.upper()), gen_dotmatrix_latin(size))


def builtin_pool(size: int = 64) -> SymbolPool:
    """The zero-asset 88-symbol pool: Latin, Braille, DCT in that order."""
    return latin_pool(size) + braille_pool(size) + dct_pool(size)


def load_atlas(manifest_path) -> SymbolPool:
    """Build a pool from a JSON manifest.

    The manifest holds an ordered ``families`` array; each item names a
    ``family`` and a ``source`` (``braille``, ``dct``, ``dotmatrix_latin`` or
    ``files``).  ``files`` families list ``entries`` of ``{name, path}`` with
    paths relative to the manifest.  A shorthand form without ``families``
    (``{"dotmatrix_latin": true, "braille": true, "dct_order": 6}``) expands to
    Latin, Braille, DCT in that order.
    """
    with open(manifest_path, encoding="utf-8") as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise AtlasError(f"{manifest_path}: invalid JSON: {exc}") from exc
    if not isinstance(spec, dict):
        raise AtlasError(f"{manifest_path}: manifest must be a JSON object")
    base = os.path.dirname(os.path.abspath(manifest_path))
    size = int(spec.get("size", 64))
    families = spec.get("families")
    if families is None:
        families = []
        if spec.get("dotmatrix_latin"):
            families.append({"family": "latin", "source": "dotmatrix_latin"})
        if spec.get("braille"):
            families.append({"family": "braille", "source": "braille"})
        if spec.get("dct_order"):
            families.append({"family": "dct", "source": "dct", "order": int(spec["dct_order"])})
    if not isinstance(families, list):
        raise AtlasError(f"{manifest_path}: 'families' must be an array")

    entries: list[SymbolEntry] = []
    for k, fam in enumerate(families):
        if not isinstance(fam, dict) or "source" not in fam:
            raise AtlasError(f"{manifest_path}: families[{k}] needs a 'source'")
        source = fam["source"]
        family = fam.get("family", source)
        if source == "braille":
            entries.extend(braille_pool(size, family))
        elif source == "dct":
            entries.extend(dct_pool(size, int(fam.get("order", 6)), family))
        elif source == "dotmatrix_latin":
            entries.extend(latin_pool(size, family))
        elif source == "files":
            for e in fam.get("entries", []):
                name = e.get("name")
                path = e.get("path")
                if name is None or path is None:
                    raise AtlasError(f"{manifest_path}: family {family!r} entry needs name and path")
                full = path if os.path.isabs(path) else os.path.join(base, path)
                if not os.path.exists(full):
                    raise AtlasError(f"{family}/{name}: missing file {full}")
                try:
                    pix = read_pgm(full)
                except PGMError as exc:
                    raise AtlasError(f"{family}/{name}: {exc}") from exc
                if pix.shape != (size, size):
                    raise AtlasError(
                        f"{family}/{name}: dimension mismatch, {pix.shape[1]}x{pix.shape[0]} in a {size}x{size} pool")
                entries.append(SymbolEntry(family, str(name), GlyphBitmap(pix)))
        else:
            raise AtlasError(f"{manifest_path}: unknown source {source!r} in families[{k}]")
    try:
        return SymbolPool(entries)
    except AtlasError as exc:
        raise AtlasError(f"{manifest_path}: {exc}") from exc
