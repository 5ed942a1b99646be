import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from glyphassign import assign as asg
from glyphassign.corpus import ARABIC, BULGARIAN, ENGLISH, Alphabet, BigramMatrix
from glyphassign.glyphs import builtin_pool, load_atlas
from glyphassign.kernels import lap as klap
from glyphassign.kernels import qap as kqap
from glyphassign.observer import ConfusionMatrix

from oracles import brute_lap, brute_qap, close, letters, naive_cost, random_instance, row_stochastic

seeds = st.integers(0, 2**32 - 1)


def _C(P):
    P = np.asarray(P, dtype=float)
    return BigramMatrix(Alphabet("custom", letters(len(P))), P)


def _F(V):
    V = np.asarray(V, dtype=float)
    return ConfusionMatrix(tuple(f"s:{k}" for k in range(len(V))), V)


# ------------------------------------------------------------------- cost --

def test_identity_confusion_costs_zero():
    rng = np.random.default_rng(0)
    C = _C(row_stochastic(rng, 4))
    assert asg.expected_confusion_cost(C, _F(np.eye(6)), [5, 0, 2, 3]) == 0.0


def test_two_letter_hand_value():
    C = _C([[0.4, 0.6], [0.4, 0.6]])
    F = _F([[0.9, 0.1], [0.2, 0.8]])
    assert abs(asg.expected_confusion_cost(C, F, [0, 1]) - 0.14) < 1e-15


def test_display_scaling():
    assert round(asg.scaled(0.00054)) == 54


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(0, 3), seeds, st.data())
def test_cost_matches_naive_double_sum(L, extra, seed, data):
    rng = np.random.default_rng(seed)
    S = L + extra
    C, F = random_instance(rng, L, S)
    m = data.draw(st.permutations(range(S)))[:L]
    assert close(asg.expected_confusion_cost(C, F, m), naive_cost(C.probs, F.values, m))
    assert asg.expected_confusion_cost(C, F, m) >= 0


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), seeds)
def test_zero_cost_iff_no_confused_pairs(L, seed):
    rng = np.random.default_rng(seed)
    P = row_stochastic(rng, L) * (rng.random((L, L)) > 0.4)
    V = np.eye(L) + (rng.random((L, L)) > 0.7) * rng.random((L, L))
    V /= V.sum(axis=1, keepdims=True)
    P = _C(P).probs  # zero rows stay zero
    m = list(range(L))
    c = asg.expected_confusion_cost(_C(P), _F(V), m)
    conflict = any(P[i, j] > 0 and V[i, j] > 0 for i in range(L) for j in range(L) if i != j)
    assert (c == 0) == (not conflict)


def test_cost_shape_errors():
    rng = np.random.default_rng(0)
    C, F = random_instance(rng, 3, 4)
    for bad in ([0, 1], [0, 0, 1], [0, 1, 9]):
        with pytest.raises(asg.AssignmentError):
            asg.expected_confusion_cost(C, F, bad)


def test_assignment_invariants():
    with pytest.raises(asg.AssignmentError, match="injective"):
        asg.Assignment(ENGLISH, tuple([0] * 26), "native", 0.0)


# ----------------------------------------------------------------- native --

def test_native_builtin_english():
    pool = builtin_pool()
    a = asg.native_assignment(ENGLISH, pool)
    assert a.mapping == tuple(range(26)) and math.isnan(a.cost)


def test_native_full_pool(full_atlas):
    pool = load_atlas(full_atlas)
    assert asg.native_assignment(ENGLISH, pool).mapping == tuple(range(26))
    assert asg.native_assignment(BULGARIAN, pool).mapping == tuple(range(116, 146))
    assert asg.native_assignment(ARABIC, pool).mapping[0] == 52
    assert asg.native_assignment(ARABIC, pool).mapping == tuple(range(52, 80))


def test_native_absent():
    with pytest.raises(asg.AssignmentError, match="cyrillic"):
        asg.native_assignment(BULGARIAN, builtin_pool())


# -------------------------------------------------------------- randomized --

def test_randomized_forced_support():
    rng = np.random.default_rng(1)
    C, F = random_instance(rng, 5, 5)
    rb = asg.randomized_baseline(C.alphabet, 5, C, F, n_seeds=30, seed=3)
    assert all(sorted(a.mapping) == list(range(5)) for a in rb.assignments)


def test_randomized_single_seed_and_order():
    rng = np.random.default_rng(2)
    C, F = random_instance(rng, 4, 9)
    one = asg.randomized_baseline(C.alphabet, 9, C, F, n_seeds=1)
    assert one.mean == one.best.cost and one.std == 0.0
    many = asg.randomized_baseline(C.alphabet, 9, C, F, n_seeds=201)
    costs = np.array([a.cost for a in many.assignments])
    assert many.best.cost <= many.mean
    assert abs(many.std - costs.std()) < 1e-15 and many.best.cost == costs.min()
    with pytest.raises(asg.AssignmentError):
        asg.randomized_baseline(C.alphabet, 3, C, F)


def test_randomized_is_uniform_over_symbols():
    rng = np.random.default_rng(3)
    C, F = random_instance(rng, 2, 6)
    rb = asg.randomized_baseline(C.alphabet, 6, C, F, n_seeds=6000)
    firsts = np.bincount([a.mapping[0] for a in rb.assignments], minlength=6)
    assert firsts.min() > 850


# --------------------------------------------------------------- Hungarian --

def test_hungarian_examples():
    assert asg.hungarian_lap([[1, 2], [3, 0]]) == ([0, 1], 1.0)
    a = np.ones((4, 4)) * 3
    np.fill_diagonal(a, 0)
    assert asg.hungarian_lap(a) == ([0, 1, 2, 3], 0.0)
    assert asg.hungarian_lap([[5, 2, 7]]) == ([1], 2.0)
    with pytest.raises(asg.AssignmentError):
        asg.hungarian_lap(np.zeros((3, 2)))
    with pytest.raises(ValueError):
        asg.hungarian_lap([[np.inf, 0]])


def test_hungarian_lexicographic_ties():
    assert asg.hungarian_lap(np.zeros((3, 5)))[0] == [0, 1, 2]
    a = [[1, 1, 0], [0, 1, 1]]
    # optimal maps with total 0 on the zeros: (2, 0) only
    assert asg.hungarian_lap(a) == ([2, 0], 0.0)
    b = [[0, 0, 5], [0, 0, 5]]
    assert asg.hungarian_lap(b) == ([0, 1], 0.0)


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2), seeds, st.booleans())
def test_hungarian_matches_brute_force(n, extra, seed, integer):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 4, size=(n, n + extra)).astype(float) if integer else rng.random((n, n + extra))
    best, first = brute_lap(a)
    got, total = asg.hungarian_lap(a)
    assert total == best and len(set(got)) == n
    assert got == first


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(0, 3), seeds)
def test_hungarian_backends_agree(n, extra, seed):
    a = np.random.default_rng(seed).random((n, n + extra))
    x = klap.hungarian_np(a)
    y = klap.hungarian_nb(a)
    assert np.array_equal(x[0], y[0])
    assert np.allclose(x[1], y[1], atol=1e-12) and np.allclose(x[2], y[2], atol=1e-12)


# --------------------------------------------------------------- solvers --

def _zero_cost_instance(rng, L, S):
    """F has a block of L symbols that never confuse each other."""
    V = row_stochastic(rng, S)
    good = rng.choice(S, L, replace=False)
    for i in good:
        for j in good:
            if i != j:
                V[i, j] = 0.0
    V /= V.sum(axis=1, keepdims=True)
    return _C(row_stochastic(rng, L)), _F(V), sorted(good)


@pytest.mark.parametrize("seed", range(5))
def test_alternating_lap_finds_zero_subset(seed):
    rng = np.random.default_rng(seed)
    C, F, good = _zero_cost_instance(rng, 4, 9)
    a = asg.optimize_alternating_lap(C, F, 9, restarts=20, seed=seed)
    assert a.cost == 0.0 and sorted(a.mapping) == good


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5), st.integers(0, 4), seeds)
def test_alternating_lap_history_non_increasing(L, extra, seed):
    rng = np.random.default_rng(seed)
    C, F = random_instance(rng, L, L + extra)
    a = asg.optimize_alternating_lap(C, F, L + extra, restarts=3, seed=seed)
    h = a.stats["history"]
    assert all(y < x for x, y in zip(h, h[1:]))
    assert close(h[-1], a.cost)


@pytest.mark.parametrize("seed", range(5))
def test_local_search_finds_zero_subset(seed):
    rng = np.random.default_rng(seed)
    C, F, good = _zero_cost_instance(rng, 4, 9)
    assert asg.optimize_local_search(C, F, 9, restarts=20, seed=seed).cost == 0.0


def test_single_letter_costs_zero():
    rng = np.random.default_rng(0)
    C, F = random_instance(rng, 1, 5)
    for fn in (asg.optimize_local_search, asg.optimize_alternating_lap):
        assert fn(C, F, 5, restarts=2).cost == 0.0
    assert asg.brute_force(C, F, 5).mapping == (0,)


def _is_local_optimum(C, F, m):
    S = F.size
    base = naive_cost(C.probs, F.values, m)
    L = len(m)
    for i, j in itertools.combinations(range(L), 2):
        n = list(m)
        n[i], n[j] = n[j], n[i]
        if naive_cost(C.probs, F.values, n) < base * (1 - 1e-9):
            return False
    for i in range(L):
        for s in set(range(S)) - set(m):
            n = list(m)
            n[i] = s
            if naive_cost(C.probs, F.values, n) < base * (1 - 1e-9):
                return False
    return True


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 5), st.integers(0, 3), seeds)
def test_local_search_reaches_local_optimum(L, extra, seed):
    rng = np.random.default_rng(seed)
    C, F = random_instance(rng, L, L + extra)
    a = asg.optimize_local_search(C, F, L + extra, restarts=1, seed=seed)
    assert _is_local_optimum(C, F, a.mapping)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 5), st.integers(0, 3), seeds)
def test_ordering_chain_small(L, extra, seed):
    rng = np.random.default_rng(seed)
    S = L + extra
    C, F = random_instance(rng, L, S)
    rb = asg.randomized_baseline(C.alphabet, S, C, F, n_seeds=15, seed=seed)
    nat = list(range(L))
    ls = asg.optimize_local_search(C, F, S, restarts=2, seed=seed, starts=[nat, rb.best.mapping])
    bf = asg.brute_force(C, F, S)
    assert bf.cost <= ls.cost + 1e-15
    assert ls.cost <= rb.best.cost <= rb.mean
    assert ls.cost <= asg.expected_confusion_cost(C, F, nat)
    for a in (ls, bf, rb.best):
        assert len(set(a.mapping)) == L and max(a.mapping) < S
        assert close(a.cost, naive_cost(C.probs, F.values, a.mapping))


def test_solver_preconditions():
    rng = np.random.default_rng(0)
    C, F = random_instance(rng, 4, 6)
    for fn in (asg.optimize_local_search, asg.optimize_alternating_lap, asg.brute_force):
        with pytest.raises(asg.AssignmentError):
            fn(C, F, 3)


def test_solvers_thread_independent():
    rng = np.random.default_rng(7)
    C, F = random_instance(rng, 6, 12)
    for fn in (asg.optimize_local_search, asg.optimize_alternating_lap):
        a = fn(C, F, 12, restarts=12, seed=5, threads=1)
        b = fn(C, F, 12, restarts=12, seed=5, threads=4)
        assert a.mapping == b.mapping and a.cost == b.cost


# ------------------------------------------------------------- brute force --

def test_brute_force_enumeration_count():
    rng = np.random.default_rng(0)
    C, F = random_instance(rng, 2, 2)
    assert asg.brute_force(C, F, 2).stats["evaluated"] == 2
    C, F = random_instance(rng, 3, 5)
    assert asg.brute_force(C, F, 5).stats["evaluated"] == 60


def test_brute_force_guard():
    rng = np.random.default_rng(0)
    C, F = random_instance(rng, 8, 30)
    with pytest.raises(asg.AssignmentError, match=str(math.perm(30, 8))):
        asg.brute_force(C, F, 30)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2), seeds)
def test_brute_force_matches_oracle(L, extra, seed):
    rng = np.random.default_rng(seed)
    S = L + extra
    C, F = random_instance(rng, L, S)
    best, arg = brute_qap(C.probs, F.values, S)
    got = asg.brute_force(C, F, S, chunk=7)
    assert close(got.cost, best) and got.mapping == arg


def test_brute_force_lexicographic_ties():
    C = _C(np.full((2, 2), 0.5))
    F = _F(np.full((3, 3), 1 / 3))
    assert asg.brute_force(C, F, 3).mapping == (0, 1)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_symmetric_objective_relabeling(seed):
    # swapping two letters whose rows/columns in a symmetric C coincide
    # leaves the optimum unchanged
    rng = np.random.default_rng(seed)
    L = 4
    A = rng.random((L, L))
    A = A + A.T
    A[:, 1] = A[:, 0]
    A[1, :] = A[0, :]
    P = A / A.sum(axis=1, keepdims=True)
    V = rng.random((L, L))
    V = V + V.T
    V = V / V.sum(axis=1, keepdims=True)
    perm = [1, 0, 2, 3]
    assert np.allclose(P[np.ix_(perm, perm)], P)
    a = asg.brute_force(_C(P), _F(V), L)
    b = asg.brute_force(_C(P[np.ix_(perm, perm)]), _F(V), L)
    assert close(a.cost, b.cost)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 5), st.integers(0, 3), st.integers(2, 1000), seeds)
def test_argmin_invariant_to_count_scaling(L, extra, k, seed):
    rng = np.random.default_rng(seed)
    S = L + extra
    counts = rng.integers(1, 30, size=(L, L))
    alpha = Alphabet("custom", letters(L))
    C1 = BigramMatrix.from_counts(alpha, counts)
    C2 = BigramMatrix.from_counts(alpha, counts * k)
    F = _F(row_stochastic(rng, S))
    for fn in (lambda C: asg.optimize_local_search(C, F, S, restarts=3, seed=1),
               lambda C: asg.optimize_alternating_lap(C, F, S, restarts=3, seed=1),
               lambda C: asg.brute_force(C, F, S)):
        assert fn(C1).mapping == fn(C2).mapping


# ----------------------------------------------------------------- kernels --

@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 4), seeds)
def test_qap_kernels_agree(L, extra, seed):
    rng = np.random.default_rng(seed)
    S = L + extra
    C, F = random_instance(rng, L, S)
    W = np.array(C.probs)
    np.fill_diagonal(W, 0)
    maps = np.array([rng.permutation(S)[:L] for _ in range(20)], dtype=np.int64)
    a = kqap.mapping_costs_np(W, F.values, maps)
    b = kqap.mapping_costs_nb(W, F.values, maps)
    ref = [naive_cost(C.probs, F.values, m) for m in maps]
    assert np.allclose(a, ref, rtol=1e-12, atol=0) and np.allclose(b, ref, rtol=1e-12, atol=0)
    start = maps[0].copy()
    ua, ca, _ = kqap.local_search_np(W, F.values, start.copy(), 1e-12, 10000)
    ub, cb, _ = kqap.local_search_nb(W, F.values, start.copy(), 1e-12, 10000)
    assert np.array_equal(ua, ub) and abs(ca - cb) <= 1e-12 * max(1.0, ca)
