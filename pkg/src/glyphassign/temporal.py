"""Inter-symbol interference as a convex mix of current and previous percepts."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .glyphs import GlyphBitmap
from .kernels import lanes
from .rng import Stream


@dataclass(frozen=True)
class MixConfig:
    alpha: float = 2.0
    beta: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("Beta shapes must be positive")


def sample_gamma(cfg: MixConfig, stream: Stream) -> float:
    """One Beta(alpha, beta) mixing weight drawn from ``stream``."""
    return stream.beta(cfg.alpha, cfg.beta)


def sample_gammas(cfg: MixConfig, keys: np.ndarray) -> np.ndarray:
    """Vectorized draws, one per substream key; keys are not modified."""
    states = np.array(keys, dtype=np.uint64, copy=True)
    return lanes.beta_lanes(states, float(cfg.alpha), float(cfg.beta))


def mix(current: GlyphBitmap, previous: GlyphBitmap, gamma: float) -> GlyphBitmap:
    """``gamma * current + (1 - gamma) * previous``, pixelwise.

    The larger weight is always applied directly (1 - g is exact for
    g >= 1/2), which makes ``mix(a, b, g) == mix(b, a, 1 - g)`` bit for bit.
    The result is clamped to the pixelwise [min, max] of the inputs so that
    rounding can never push it outside the convex hull.
    """
    if current.shape != previous.shape:
        raise ValueError(f"cannot mix glyphs of shape {current.shape} and {previous.shape}")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    a = current.pixels
    b = previous.pixels
    if gamma < 0.5:
        a, b, gamma = b, a, 1.0 - gamma
    out = gamma * a + (1.0 - gamma) * b
    return GlyphBitmap(np.clip(out, np.minimum(a, b), np.maximum(a, b)))
