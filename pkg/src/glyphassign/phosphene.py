"""Spatial prosthetic distortion: glyph -> electrode activations -> percept.

Each electrode sits at the centre of its grid cell and, when active, deposits
an isotropic Gaussian of standard deviation ``rho_um / um_per_px`` pixels.
With ``lambda_um > 0`` it also deposits a comet tail: Gaussians at 1-pixel
steps along the straight ray toward ``axon_origin_px``, with peaks decaying as
``exp(-t * um_per_px / lambda_um)`` and truncated after three decay lengths.
This is a straight-ray stand-in for a fibre-bundle axon map.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .glyphs import GlyphBitmap
from .kernels import render


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DistortionParams:
    rho_um: float
    lambda_um: float
    grid: int = 16
    um_per_px: float = 100.0
    axon_origin_px: tuple[float, float] = (96.0, 32.0)

    def __post_init__(self):
        object.__setattr__(self, "axon_origin_px", tuple(float(v) for v in self.axon_origin_px))
        if not self.rho_um > 0:
            raise ConfigError("rho_um must be > 0")
        if not self.lambda_um >= 0:
            raise ConfigError("lambda_um must be >= 0")
        if int(self.grid) != self.grid or self.grid < 1:
            raise ConfigError("grid must be a positive integer")
        if not self.um_per_px > 0:
            raise ConfigError("um_per_px must be > 0")

    @property
    def sigma_px(self) -> float:
        return self.rho_um / self.um_per_px

    @property
    def decay_px(self) -> float:
        return self.lambda_um / self.um_per_px

    @property
    def streak_steps(self) -> int:
        return int(math.floor(3.0 * self.decay_px + 1e-9)) if self.lambda_um > 0 else 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["axon_origin_px"] = list(self.axon_origin_px)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DistortionParams":
        d = dict(d)
        if "axon_origin_px" in d:
            d["axon_origin_px"] = tuple(d["axon_origin_px"])
        return cls(**d)


PRESETS = {
    "low": (100.0, 0.0),
    "medium": (300.0, 1000.0),
    "high": (500.0, 5000.0),
}


def preset(name: str, **overrides) -> DistortionParams:
    try:
        rho, lam = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown distortion preset {name!r}; choose from {sorted(PRESETS)}") from None
    return DistortionParams(rho_um=rho, lambda_um=lam, **overrides)


def activations(glyph: GlyphBitmap, grid: int) -> np.ndarray:
    """Block-average the glyph into a (grid, grid) activation matrix."""
    h, w = glyph.shape
    if h % grid or w % grid:
        raise ConfigError(f"glyph {w}x{h} is not divisible into a {grid}x{grid} electrode grid")
    return glyph.pixels.reshape(grid, h // grid, grid, w // grid).mean(axis=(1, 3))


def electrode_centers(height: int, width: int, grid: int) -> np.ndarray:
    """(grid*grid, 2) array of (x, y) cell centres, row-major over the grid."""
    cw = width / grid
    ch = height / grid
    xs = np.arange(grid) * cw + (cw - 1) / 2.0
    ys = np.arange(grid) * ch + (ch - 1) / 2.0
    yy, xx = np.meshgrid(ys, xs, indexing="ij")
    return np.column_stack([xx.ravel(), yy.ravel()])


@lru_cache(maxsize=16)
def _basis(params: DistortionParams, height: int, width: int) -> np.ndarray:
    centers = electrode_centers(height, width, params.grid)
    origin = np.array(params.axon_origin_px, dtype=np.float64)
    b = render.electrode_basis(centers, origin, params.sigma_px, params.decay_px,
                               params.streak_steps, height, width)
    b = b.reshape(params.grid * params.grid, height * width)
    b.setflags(write=False)
    return b


def unnormalized_percept(glyph: GlyphBitmap, params: DistortionParams) -> np.ndarray:
    """Summed deposits before peak normalization, as a (height, width) array."""
    a = activations(glyph, params.grid).ravel()
    basis = _basis(params, glyph.height, glyph.width)
    return (a @ basis).reshape(glyph.shape)


def render_percept(glyph: GlyphBitmap, params: DistortionParams) -> GlyphBitmap:
    out = unnormalized_percept(glyph, params)
    peak = out.max()
    if peak > 1.0:
        out = out / peak
    return GlyphBitmap(np.clip(out, 0.0, 1.0))


def render_pool(glyphs, params: DistortionParams) -> list[GlyphBitmap]:
    return [render_percept(g, params) for g in glyphs]
