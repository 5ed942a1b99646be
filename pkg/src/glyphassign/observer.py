"""Proxy observer: confusion matrices from template matching, or from CSV.

The built-in observer renders every pool glyph under the distortion, then for
each true symbol runs Monte-Carlo trials in which a uniformly drawn previous
symbol is mixed in with a Beta-distributed weight and the mix is assigned to
the best-correlated template.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import matrix_csv, pgm
from .glyphs import GlyphBitmap, SymbolPool
from .kernels import classify as _classify
from .kernels import lanes
from .phosphene import DistortionParams, render_percept
from .rng import derive_array, substream_key
from .temporal import MixConfig

# Sum of squared deviations at or below this (per pixel) counts as constant.
FLAT_TOL_PER_PIXEL = 1e-18


class ConfusionValidationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Row i is the distribution of the predicted symbol given true symbol i.

    Rows sum to 1 within 1e-6.  Restricted matrices may also carry rows that
    are exactly zero (no retained mass).
    """

    pool_labels: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        labels = tuple(str(x) for x in self.pool_labels)
        vals = np.array(self.values, dtype=np.float64)
        s = len(labels)
        if vals.shape != (s, s):
            raise ConfusionValidationError(f"values shape {vals.shape} does not match {s} labels")
        if len(set(labels)) != s:
            raise ConfusionValidationError("duplicate pool labels")
        if np.any(vals < 0) or np.any(vals > 1) or not np.all(np.isfinite(vals)):
            raise ConfusionValidationError("confusion values must lie in [0, 1]")
        sums = vals.sum(axis=1)
        bad = np.flatnonzero((np.abs(sums - 1.0) > 1e-6) & np.any(vals != 0, axis=1))
        if bad.size:
            r = int(bad[0])
            raise ConfusionValidationError(f"row {r} ({labels[r]}) sums to {sums[r]!r}")
        vals.setflags(write=False)
        object.__setattr__(self, "pool_labels", labels)
        object.__setattr__(self, "values", vals)

    @property
    def size(self) -> int:
        return len(self.pool_labels)


@dataclass(frozen=True)
class ObserverConfig:
    params: DistortionParams
    trials_per_symbol: int = 500
    mix: MixConfig = field(default_factory=MixConfig)

    def __post_init__(self):
        if self.trials_per_symbol < 1:
            raise ValueError("trials_per_symbol must be >= 1")


def templates(pool: SymbolPool, params: DistortionParams) -> list[GlyphBitmap]:
    return [render_percept(e.glyph, params) for e in pool]


def _centred(t: np.ndarray) -> np.ndarray:
    v = t.reshape(t.shape[0], -1)
    return v - v.mean(axis=1, keepdims=True)


def classify(percept: GlyphBitmap, templates: Sequence[GlyphBitmap]) -> int:
    """Index of the template with the highest Pearson correlation.

    Constant templates correlate 0 with everything, a constant percept
    correlates 0 with every template, and ties go to the lowest index.
    """
    if not templates:
        raise ValueError("no templates")
    for k, t in enumerate(templates):
        if t.shape != percept.shape:
            raise ValueError(f"template {k} has shape {t.shape}, percept has {percept.shape}")
    npix = percept.pixels.size
    p = percept.pixels.ravel() - percept.pixels.mean()
    pn = float(p @ p)
    if pn <= FLAT_TOL_PER_PIXEL * npix:
        return 0
    tc = _centred(np.stack([t.pixels for t in templates]))
    tn = np.einsum("ij,ij->i", tc, tc)
    corr = np.zeros(len(templates))
    ok = tn > FLAT_TOL_PER_PIXEL * npix
    corr[ok] = (tc[ok] @ p) / np.sqrt(tn[ok] * pn)
    return int(np.argmax(corr))


def template_gram(tmpl: Sequence[GlyphBitmap]):
    """Centred Gram matrix and inverse template norms (0 for flat templates)."""
    stack = np.stack([t.pixels for t in tmpl])
    npix = stack[0].size
    c = _centred(stack)
    gram = c @ c.T
    d = np.diag(gram).copy()
    inv = np.zeros_like(d)
    ok = d > FLAT_TOL_PER_PIXEL * npix
    inv[ok] = 1.0 / np.sqrt(d[ok])
    return gram, inv, FLAT_TOL_PER_PIXEL * npix


def trial_draws(seed: int, rows: np.ndarray, s: int, trials: int, alpha: float, beta: float):
    """Previous-symbol indices and mixing weights for every (row, trial).

    Each (true symbol, trial) pair owns a substream, so the draws do not depend
    on how rows are split across workers.
    """
    base = np.uint64(substream_key(seed, "confusion"))
    row_keys = derive_array(np.full(rows.shape, base), rows.astype(np.uint64))
    states = derive_array(row_keys[:, None], np.arange(trials, dtype=np.uint64)[None, :]).ravel()
    cur = np.repeat(rows.astype(np.int64), trials)
    prev = lanes.integer_lanes(states, s - 1, lanes.int_reject_remainder(s - 1))
    prev = prev + (prev >= cur)
    gam = lanes.beta_lanes(states, float(alpha), float(beta))
    return cur, prev, gam


def estimate_confusion(pool: SymbolPool, cfg: ObserverConfig, threads: int = 1,
                       tmpl: Sequence[GlyphBitmap] | None = None) -> ConfusionMatrix:
    s = len(pool)
    if s < 2:
        raise ValueError("confusion estimation needs at least 2 symbols")
    if tmpl is None:
        tmpl = templates(pool, cfg.params)
    gram, inv, flat_tol = template_gram(tmpl)
    trials = cfg.trials_per_symbol

    def run(rows):
        cur, prev, gam = trial_draws(cfg.mix.seed, rows, s, trials, cfg.mix.alpha, cfg.mix.beta)
        pred = _classify.classify_mixes(gram, inv, cur, prev, gam, flat_tol)
        counts = np.zeros((rows.size, s), dtype=np.int64)
        np.add.at(counts, (np.repeat(np.arange(rows.size), trials), pred), 1)
        return counts

    chunks = [c for c in np.array_split(np.arange(s), max(1, min(int(threads), s))) if c.size]
    if len(chunks) == 1:
        parts = [run(chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as ex:
            parts = list(ex.map(run, chunks))
    counts = np.vstack(parts)
    return ConfusionMatrix(tuple(pool.labels), counts / float(trials))


def restricted_values(values: np.ndarray, subset) -> np.ndarray:
    """Rows/columns ``subset`` of a confusion array, rows renormalized to 1."""
    idx = np.asarray(subset, dtype=np.int64)
    sub = values[np.ix_(idx, idx)]
    den = sub.sum(axis=1, keepdims=True)
    return np.divide(sub, den, out=np.zeros_like(sub), where=den > 0)


def restrict_renormalize(F: ConfusionMatrix, subset: Sequence[int]) -> ConfusionMatrix:
    subset = [int(i) for i in subset]
    if not subset:
        raise ValueError("subset must not be empty")
    if len(set(subset)) != len(subset):
        raise ValueError("subset indices must be unique")
    if min(subset) < 0 or max(subset) >= F.size:
        raise ValueError("subset index out of range")
    return ConfusionMatrix(tuple(F.pool_labels[i] for i in subset), restricted_values(F.values, subset))


def write_confusion_csv(F: ConfusionMatrix, path) -> None:
    matrix_csv.write_matrix_csv(path, F.pool_labels, F.values)


def read_confusion_csv(path, tol: float = 1e-3) -> ConfusionMatrix:
    """Load a confusion matrix; rows must sum to 1 within ``tol``.

    Accepted rows are rescaled to sum to exactly 1 (external tools round).
    """
    labels, values = matrix_csv.read_matrix_csv(path)
    sums = values.sum(axis=1)
    for r, sm in enumerate(sums):
        if abs(sm - 1.0) > tol:
            raise ConfusionValidationError(
                f"{path}: row {r + 2} ({labels[r]}) sums to {sm:.6g}, outside 1 +/- {tol:g}")
    if np.any(values > 1.0 + tol):
        r, c = np.argwhere(values > 1.0 + tol)[0]
        raise ConfusionValidationError(f"{path}: row {r + 2}, column {c + 2}: value exceeds 1")
    # leave already-normalized rows bit-exact so CSV round trips are lossless
    fix = np.abs(sums - 1.0) > 1e-12
    values[fix] = values[fix] / sums[fix, None]
    return ConfusionMatrix(tuple(labels), np.clip(values, 0.0, 1.0))


def confusion_heatmap(F: ConfusionMatrix, path) -> None:
    """8-bit PGM, darker = more confusion, scaled by the largest off-diagonal."""
    v = F.values
    off = v.copy()
    np.fill_diagonal(off, 0.0)
    m = off.max()
    img = np.zeros_like(v) if m <= 0 else np.clip(1.0 - v / m, 0.0, 1.0)
    if m <= 0:
        img = np.where(np.eye(len(v), dtype=bool), 0.0, 1.0)
    pgm.write_pgm(path, img)
