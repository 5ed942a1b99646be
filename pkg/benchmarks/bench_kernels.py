"""Time each numba kernel against its numpy twin on pipeline-sized inputs.

    python benchmarks/bench_kernels.py [--repeat 5] [--pipeline]

``--pipeline`` also times a full default ``evaluate`` in subprocesses with
and without GLYPHASSIGN_DISABLE_NUMBA.
"""
import argparse
import os
import subprocess
import sys
import tempfile
import time

import numpy as np

from glyphassign import _accel
from glyphassign.corpus import count_bigrams, read_documents
from glyphassign.glyphs import builtin_pool
from glyphassign.kernels import classify, lanes, lap, qap, render
from glyphassign.observer import template_gram, templates
from glyphassign.phosphene import electrode_centers, preset
from glyphassign.pipeline import fixture_corpus


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a), np.asarray(b)
    if a.dtype.kind in "iub":
        return np.array_equal(a, b)
    return np.allclose(a, b, rtol=1e-12, atol=1e-12)


def cases():
    rng = np.random.default_rng(0)
    pool = builtin_pool()
    p = preset("high")
    centres = electrode_centers(64, 64, 16)
    origin = np.array(p.axon_origin_px)
    yield "electrode basis (high)", render.electrode_basis_nb, render.electrode_basis_np, \
        lambda: (centres, origin, p.sigma_px, p.decay_px, p.streak_steps, 64, 64)

    keys = rng.integers(0, 2**63, size=44000, dtype=np.int64).astype(np.uint64)
    yield "beta lanes (44k)", lanes.beta_lanes_nb, lanes.beta_lanes_np, lambda: (keys.copy(), 2.0, 2.0)

    gram, inv, tol = template_gram(templates(pool, preset("medium")))
    s = len(pool)
    cur = np.repeat(np.arange(s), 500)
    prev = (cur + rng.integers(1, s, cur.size)) % s
    gam = rng.random(cur.size)
    yield "classify mixes (88 x 500)", classify.classify_mixes_nb, classify.classify_mixes_np, \
        lambda: (gram, inv, cur, prev, gam, tol)

    C = count_bigrams(read_documents(fixture_corpus("english")), "english")
    W = np.array(C.probs)
    np.fill_diagonal(W, 0.0)
    F = rng.random((s, s))
    F /= F.sum(axis=1, keepdims=True)
    maps = np.array([rng.permutation(s)[:26] for _ in range(2000)], dtype=np.int64)
    yield "mapping costs (2000 maps)", qap.mapping_costs_nb, qap.mapping_costs_np, lambda: (W, F, maps)
    yield "local search (26 of 88)", qap.local_search_nb, qap.local_search_np, \
        lambda: (W, F, maps[0].copy(), 1e-12, 100000)

    a = rng.random((88, 88))
    yield "hungarian (88 x 88)", lap.hungarian_nb, lap.hungarian_np, lambda: (a,)


def bench_pipeline():
    rows = []
    for disabled in (False, True):
        env = dict(os.environ)
        env.pop("GLYPHASSIGN_DISABLE_NUMBA", None)
        if disabled:
            env["GLYPHASSIGN_DISABLE_NUMBA"] = "1"
        with tempfile.TemporaryDirectory() as out:
            t0 = time.perf_counter()
            subprocess.run([sys.executable, "-m", "glyphassign.cli", "evaluate", "--output-dir", out],
                           env=env, check=True, stdout=subprocess.DEVNULL)
            rows.append(time.perf_counter() - t0)
    print(f"\nfull evaluate: numba {rows[0]:.1f} s, numpy {rows[1]:.1f} s, speedup {rows[1] / rows[0]:.1f}x")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--pipeline", action="store_true", help="also time a full evaluate")
    args = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        sys.exit("numba is not installed; nothing to compare")
    print(f"{'kernel':28s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}  agree")
    for name, nb_fn, np_fn, make in cases():
        nb_fn(*make())  # compile outside the timing
        t_nb, out_nb = best_of(lambda: nb_fn(*make()), args.repeat)
        t_np, out_np = best_of(lambda: np_fn(*make()), max(1, min(args.repeat, 3)))
        print(f"{name:28s} {t_nb * 1e3:10.2f} {t_np * 1e3:10.2f} {t_np / t_nb:7.1f}x  {same(out_nb, out_np)}")
    if args.pipeline:
        bench_pipeline()


if __name__ == "__main__":
    main()
