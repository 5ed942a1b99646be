"""Bigram-weighted confusion cost and letter -> symbol assignment solvers."""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .corpus import Alphabet, BigramMatrix
from .glyphs import SymbolPool
from .kernels import lap as _lap
from .kernels import qap as _qap
from .observer import ConfusionMatrix, restricted_values
from .rng import Stream

NATIVE_FAMILY = {"english": "latin", "bulgarian": "cyrillic", "arabic": "arabic"}
BRUTE_FORCE_LIMIT = 10**7
# Relative improvement a local move must beat; guards against rounding cycles.
MOVE_REL_TOL = 1e-12
# Costs this close (relative) count as tied and fall back to mapping order.
TIE_REL_TOL = 1e-12


class AssignmentError(ValueError):
    pass


@dataclass(frozen=True)
class Assignment:
    alphabet: Alphabet
    mapping: tuple[int, ...]
    method: str
    cost: float
    seed: int | None = None
    stats: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        m = tuple(int(x) for x in self.mapping)
        if len(m) != len(self.alphabet):
            raise AssignmentError("mapping length differs from alphabet size")
        if len(set(m)) != len(m):
            raise AssignmentError("mapping is not injective")
        object.__setattr__(self, "mapping", m)


def _weights(C: BigramMatrix) -> np.ndarray:
    W = np.array(C.probs, dtype=np.float64)
    np.fill_diagonal(W, 0.0)
    return W


def _pool_size(pool) -> int:
    return pool if isinstance(pool, (int, np.integer)) else len(pool)


def _check_mapping(mapping, L, S):
    m = np.asarray(mapping, dtype=np.int64)
    if m.shape != (L,):
        raise AssignmentError(f"mapping has {m.size} entries, alphabet has {L}")
    if m.size and (m.min() < 0 or m.max() >= S):
        raise AssignmentError("mapping points outside the pool")
    if np.unique(m).size != m.size:
        raise AssignmentError("mapping is not injective")
    return m


def expected_confusion_cost(C: BigramMatrix, F: ConfusionMatrix, mapping) -> float:
    """Sum over ordered letter pairs i != j of P(j | i) * F'[pi(i), pi(j)].

    ``F'`` is ``F`` restricted to the mapped symbols with rows renormalized.
    """
    m = _check_mapping(mapping, C.size, F.size)
    Fr = restricted_values(F.values, m)
    return float((_weights(C) * Fr).sum())


def scaled(cost: float, scale: float = 1e5) -> float:
    return cost * scale


def _best(cands):
    """(mapping, cost) of the cheapest candidate; near-ties go to the smaller mapping."""
    lo = min(c for c, _ in cands)
    tol = TIE_REL_TOL * max(abs(lo), 1e-300)
    return min((m, c) for c, m in cands if c <= lo + tol)


def _finish(C, F, alphabet, mapping, method, seed=None, **stats) -> Assignment:
    mapping = tuple(int(x) for x in mapping)
    return Assignment(alphabet, mapping, method, expected_confusion_cost(C, F, mapping), seed, stats)


def native_assignment(alphabet: Alphabet, pool: SymbolPool, C=None, F=None, family: str | None = None) -> Assignment:
    """Letter i -> the i-th symbol of the alphabet's own script family.

    ``cost`` is filled in when C and F are given, NaN otherwise.
    """
    family = family or NATIVE_FAMILY.get(alphabet.language)
    if family is None:
        raise AssignmentError(f"no native family known for language {alphabet.language!r}")
    idx = pool.family_indices(family)
    if not idx:
        raise AssignmentError(f"pool has no native {family!r} family for {alphabet.language}")
    if len(idx) != len(alphabet):
        raise AssignmentError(
            f"native family {family!r} has {len(idx)} symbols, alphabet has {len(alphabet)} letters")
    if C is None or F is None:
        return Assignment(alphabet, tuple(idx), "native", float("nan"))
    return _finish(C, F, alphabet, idx, "native")


@dataclass(frozen=True)
class RandomizedBaseline:
    assignments: tuple[Assignment, ...]
    mean: float
    std: float
    best: Assignment


def randomized_baseline(alphabet: Alphabet, pool, C: BigramMatrix, F: ConfusionMatrix,
                        n_seeds: int = 201, seed: int = 0) -> RandomizedBaseline:
    """Uniform injective maps, one per seed, ignoring C and F."""
    S, L = _pool_size(pool), len(alphabet)
    if S < L:
        raise AssignmentError(f"pool has {S} symbols, fewer than the {L} letters")
    if n_seeds < 1:
        raise ValueError("n_seeds must be >= 1")
    maps = np.array([Stream.from_seed(seed, "randomized", k).choice_without_replacement(S, L)
                     for k in range(n_seeds)], dtype=np.int64).reshape(n_seeds, L)
    out = tuple(_finish(C, F, alphabet, maps[k], "randomized", seed=k) for k in range(n_seeds))
    costs = np.array([a.cost for a in out])
    best = min(out, key=lambda a: (a.cost, a.seed))
    return RandomizedBaseline(out, float(costs.mean()), float(costs.std()), best)


# ------------------------------------------------------------- Hungarian --

def hungarian_lap(cost_matrix) -> tuple[list[int], float]:
    """Exact min-cost injective row -> column map for an n x m matrix, n <= m.

    Among optimal maps the lexicographically smallest is returned.
    """
    a = np.array(cost_matrix, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("cost matrix must be 2-D")
    n, m = a.shape
    if n > m:
        raise AssignmentError(f"more rows ({n}) than columns ({m})")
    if not np.all(np.isfinite(a)):
        raise ValueError("cost matrix entries must be finite")
    if n == 0:
        return [], 0.0
    assign, u, v = _lap.hungarian(a)
    opt = float(a[np.arange(n), assign].sum())
    tol = 1e-12 * (1.0 + float(np.abs(a).max())) * n
    rc = a - u[:, None] - v[None, :]
    if np.count_nonzero(rc <= tol) > n:
        assign = _lexicographic_refine(a, assign, rc, opt, tol)
    return [int(x) for x in assign], float(a[np.arange(n), assign].sum())


def _lexicographic_refine(a, assign, rc, opt, tol):
    n, m = a.shape
    big = (float(np.abs(a).max()) + 1.0) * (n + 1) * 4.0
    fixed: list[tuple[int, int]] = []
    cur = assign.copy()

    def forced(pairs):
        b = a.copy()
        for r, c in pairs:
            keep = b[r, c]
            b[r, :] = big
            b[:, c] = big
            b[r, c] = keep
        sol, _, _ = _lap.hungarian(b)
        return sol

    for i in range(n):
        taken = {c for _, c in fixed}
        for c in np.flatnonzero(rc[i] <= tol):
            if c >= cur[i]:
                break
            if c in taken:
                continue
            sol = forced(fixed + [(i, int(c))])
            if sol[i] == c and a[np.arange(n), sol].sum() <= opt + tol:
                cur = sol
                break
        fixed.append((i, int(cur[i])))
    return cur


# ------------------------------------------------------------ QAP solvers --

def _random_start(S, L, seed, tag, r):
    return np.array(Stream.from_seed(seed, tag, r).choice_without_replacement(S, L), dtype=np.int64)


def _run_restarts(fn, starts, threads):
    if threads <= 1 or len(starts) <= 1:
        return [fn(s) for s in starts]
    with ThreadPoolExecutor(max_workers=int(threads)) as ex:
        return list(ex.map(fn, starts))


def alternating_lap_step_costs(W, Fv, u):
    """Linear cost of moving each letter i to each symbol s, others fixed.

    Entry [i, s] collects every term of the objective whose renormalized
    confusion row changes when letter i moves to s: letter i's own row, and
    each other letter j's row, whose retained set swaps u[i] for s.  For an
    unused s this is exactly the objective of the single-letter move.
    """
    L = u.size
    A = Fv[np.ix_(u, u)]
    R = A.sum(axis=1)
    N = (W * A).sum(axis=1)
    Fsu = Fv[:, u]                              # (s, j): F[s, u_j]
    Fus = Fv[u, :]                              # (j, s): F[u_j, s]
    # own row: sum_{j != i} W[i,j] F[s,u_j] / (sum_{j != i} F[s,u_j] + F[s,s])
    num_out = W @ Fsu.T                         # W[i,i] = 0
    den_out = Fsu.sum(axis=1)[None, :] - Fsu.T + np.diag(Fv)[None, :]
    out = np.divide(num_out, den_out, out=np.zeros_like(num_out), where=den_out > 0)
    # other rows j: u_i replaced by s in their retained set
    dF = Fus[:, None, :] - A[:, :, None]                 # (j, i, s)
    num_in = N[:, None, None] + W[:, :, None] * dF
    den_in = R[:, None, None] + dF
    term = np.divide(num_in, den_in, out=np.zeros_like(num_in), where=den_in > 0)
    term *= ~np.eye(L, dtype=bool)[:, :, None]
    return out + term.sum(axis=0)


def _alt_lap_from(W, Fv, start, max_iter=1000, ladder=12):
    """Iterate linearize -> Hungarian -> accept-if-better to a fixed point.

    When the unpenalized LAP step does not lower the cost, the step is retried
    with a growing penalty for moving a letter off its current symbol, which
    shrinks the step until it improves or collapses to the current map.
    """
    u = start.copy()
    L = u.size
    rows = np.arange(L)
    cost = float(_qap.mapping_costs(W, Fv, u[None, :])[0])
    history = [cost]
    for _ in range(max_iter):
        lin = alternating_lap_step_costs(W, Fv, u)
        spread = float(lin.max() - lin.min())
        moved = False
        for k in range(ladder + 1):
            mu = 0.0 if k == 0 else spread * 2.0 ** (k - ladder)
            pen = lin + mu
            pen[rows, u] -= mu
            cand, _ = hungarian_lap(pen)
            cand = np.array(cand, dtype=np.int64)
            if np.array_equal(cand, u):
                break
            c = float(_qap.mapping_costs(W, Fv, cand[None, :])[0])
            if c < cost - MOVE_REL_TOL * cost:
                u, cost = cand, c
                history.append(cost)
                moved = True
                break
        if not moved:
            break
    return u, cost, history


def optimize_alternating_lap(C: BigramMatrix, F: ConfusionMatrix, pool, restarts: int = 20,
                             seed: int = 0, starts: Sequence | None = None, threads: int = 1) -> Assignment:
    """Iterated Hungarian on the linearized objective, best over restarts."""
    S, L = _pool_size(pool), C.size
    if S < L:
        raise AssignmentError(f"pool has {S} symbols, fewer than the {L} letters")
    W, Fv = _weights(C), np.ascontiguousarray(F.values)
    inits = [np.array(s, dtype=np.int64) for s in (starts or [])]
    inits += [_random_start(S, L, seed, "alternating_lap", r) for r in range(restarts)]
    if not inits:
        raise ValueError("need at least one restart or start")
    runs = _run_restarts(lambda s: _alt_lap_from(W, Fv, s), inits, threads)
    u, _ = _best([(c, tuple(int(x) for x in m)) for m, c, _ in runs])
    hist = next(h for m, c, h in runs if tuple(int(x) for x in m) == u)
    return _finish(C, F, C.alphabet, u, "hungarian_alt", seed=seed,
                   restarts=len(inits), history=hist)


def optimize_local_search(C: BigramMatrix, F: ConfusionMatrix, pool, restarts: int = 20,
                          seed: int = 0, starts: Sequence | None = None, threads: int = 1,
                          max_iter: int = 100000) -> Assignment:
    """Steepest descent over swap and replace-with-unused moves.

    ``starts`` are extra initial mappings (e.g. the native map, the best
    random baseline); they are run in addition to ``restarts`` random ones.
    """
    S, L = _pool_size(pool), C.size
    if S < L:
        raise AssignmentError(f"pool has {S} symbols, fewer than the {L} letters")
    W, Fv = _weights(C), np.ascontiguousarray(F.values)
    inits = [np.array(s, dtype=np.int64) for s in (starts or [])]
    inits += [_random_start(S, L, seed, "local_search", r) for r in range(restarts)]
    if not inits:
        raise ValueError("need at least one restart or start")
    for s in inits:
        _check_mapping(s, L, S)

    def run(s):
        u, c, it = _qap.local_search(W, Fv, s, MOVE_REL_TOL, max_iter)
        return tuple(int(x) for x in u), float(c), int(it)

    runs = _run_restarts(run, inits, threads)
    u, _ = _best([(c, m) for m, c, _ in runs])
    return _finish(C, F, C.alphabet, u, "local_search", seed=seed,
                   restarts=len(inits), moves=[it for _, _, it in runs])


def count_injective(S: int, L: int) -> int:
    return math.perm(S, L) if 0 <= L <= S else 0


def brute_force(C: BigramMatrix, F: ConfusionMatrix, pool, limit: int = BRUTE_FORCE_LIMIT,
                chunk: int = 50000) -> Assignment:
    """Exhaustive minimum over all injective maps, in lexicographic order."""
    S, L = _pool_size(pool), C.size
    total = count_injective(S, L)
    if S < L:
        raise AssignmentError(f"pool has {S} symbols, fewer than the {L} letters")
    if total > limit:
        raise AssignmentError(f"brute force refused: {total} injective maps exceed the limit of {limit}")
    W, Fv = _weights(C), np.ascontiguousarray(F.values)
    perms = itertools.permutations(range(S), L)
    best_cost, best_map = math.inf, None
    seen = 0
    while True:
        block = np.array(list(itertools.islice(perms, chunk)), dtype=np.int64)
        if block.size == 0:
            break
        block = block.reshape(-1, L)
        costs = _qap.mapping_costs(W, Fv, block)
        seen += block.shape[0]
        k = int(np.argmin(costs))
        if costs[k] < best_cost - TIE_REL_TOL * max(abs(best_cost), 1e-300) if best_map is not None else True:
            # earlier blocks win ties, so only a strictly better block replaces them
            lo = costs[k]
            tied = np.flatnonzero(costs <= lo + TIE_REL_TOL * max(abs(lo), 1e-300))
            best_cost, best_map = float(costs[tied[0]]), block[tied[0]]
    if best_map is None:  # L == 0
        best_map = np.zeros(0, dtype=np.int64)
    return _finish(C, F, C.alphabet, best_map, "brute_force", evaluated=seen)
