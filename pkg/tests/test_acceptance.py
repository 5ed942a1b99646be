"""Acceptance criteria 1-9; each test prints one PASS/FAIL line."""
import filecmp
import itertools
import os
import time

import numpy as np
import pytest

from glyphassign import assign as asg
from glyphassign import corpus, glyphs, observer
from glyphassign import phosphene as ph
from glyphassign import pipeline as pl
from glyphassign.glyphs import GlyphBitmap
from glyphassign.rng import derive_array, substream_key
from glyphassign.temporal import MixConfig, sample_gammas

from oracles import brute_lap, brute_qap, close, random_instance


@pytest.fixture(scope="module")
def english_run(tmp_path_factory):
    """Default evaluate, 201 seeds, three presets, single thread."""
    out = tmp_path_factory.mktemp("eval1")
    t0 = time.perf_counter()
    rep = pl.evaluate(pl.PipelineConfig(output_dir=str(out), threads=1))
    return rep, out, time.perf_counter() - t0


def test_1_oracle_equivalence(verdict):
    t0 = time.perf_counter()
    ls_hits = alt_hits = 0
    for k in range(100):
        rng = np.random.default_rng(1000 + k)
        C, F = random_instance(rng, 4, 6)
        best, _ = brute_qap(C.probs, F.values, 6)
        ls_hits += close(asg.optimize_local_search(C, F, 6, restarts=20, seed=k).cost, best)
        alt_hits += close(asg.optimize_alternating_lap(C, F, 6, restarts=20, seed=k).cost, best)
    dt = time.perf_counter() - t0
    ok = ls_hits >= 95 and alt_hits >= 90 and dt < 60
    verdict(1, ok, f"local search {ls_hits}/100 (need >= 95), alternating LAP {alt_hits}/100 "
                   f"(need >= 90), {dt:.1f} s (limit 60 s)")
    assert ok


def test_2_hungarian_exactness(verdict):
    rng = np.random.default_rng(2)
    bad = 0
    for k in range(200):
        n = 1 + k % 7
        a = rng.random((n, n)) * 10
        best, _ = brute_lap(a)
        _, total = asg.hungarian_lap(a)
        bad += total != best
    verdict(2, bad == 0, f"{200 - bad}/200 random LAPs (n = m <= 7) equal the permutation optimum exactly")
    assert bad == 0


def test_3_ordering_chain(english_run, verdict):
    rep, _, dt = english_run
    lines, ok = [], dt < 600
    for r in rep.rows:
        chain = r.optimized <= r.random_best <= r.random_mean and r.optimized <= r.native
        factor = r.native / r.optimized
        ok &= chain and factor > 2
        lines.append(f"{r.distortion}: opt {r.optimized * 1e5:.0f} <= best {r.random_best * 1e5:.0f} <= "
                     f"mean {r.random_mean * 1e5:.0f}, native {r.native * 1e5:.0f}, factor {factor:.2f}")
    verdict(3, ok, "; ".join(lines) + f"; {dt:.1f} s single-threaded (limit 600 s)")
    assert ok


def test_4_beta_statistics(verdict):
    cfg = MixConfig(2.0, 2.0)
    base = np.uint64(substream_key(4, "beta"))
    keys = derive_array(np.full(10**6, base), np.arange(10**6, dtype=np.uint64))
    g = sample_gammas(cfg, keys)
    small = g[:10**5]
    mean, var = small.mean(), small.var()
    edges = np.linspace(0, 1, 21)
    hist, _ = np.histogram(g, bins=edges, density=True)
    cdf = 3 * edges ** 2 - 2 * edges ** 3  # integral of 6x(1-x)
    expected = np.diff(cdf) / np.diff(edges)
    dev = np.max(np.abs(hist - expected))
    ok = abs(mean - 0.5) <= 0.01 and abs(var - 0.05) <= 0.005 and dev <= 0.02
    verdict(4, ok, f"mean {mean:.4f} (0.5 +/- 0.01), variance {var:.5f} (0.05 +/- 0.005), "
                   f"max 20-bin density deviation {dev:.4f} at 1e6 samples (<= 0.02)")
    assert ok


def test_5_stochastic_invariants(english_run, verdict):
    _, out, _ = english_run
    worst_c = 0.0
    for lang in corpus.ALPHABETS:
        m = corpus.count_bigrams(corpus.read_documents(pl.fixture_corpus(lang)), lang)
        rows = m.counts.sum(axis=1) > 0
        worst_c = max(worst_c, float(np.max(np.abs(m.probs[rows].sum(axis=1) - 1))))
    worst_f = 0.0
    worst_r = 0.0
    rng = np.random.default_rng(5)
    for name in ("low", "medium", "high"):
        F = observer.read_confusion_csv(os.path.join(out, f"confusion_{name}.csv"))
        worst_f = max(worst_f, float(np.max(np.abs(F.values.sum(axis=1) - 1))))
        for _ in range(200):
            subset = rng.choice(F.size, rng.integers(1, 40), replace=False)
            s = observer.restrict_renormalize(F, subset).values.sum(axis=1)
            dev = np.where(s == 0, 0.0, np.abs(s - 1))
            worst_r = max(worst_r, float(dev.max()))
    ok = worst_c <= 1e-9 and worst_f <= 1e-6 and worst_r <= 1e-9
    verdict(5, ok, f"bigram rows off by <= {worst_c:.1e} (1e-9), confusion rows <= {worst_f:.1e} (1e-6), "
                   f"restricted rows <= {worst_r:.1e} (1e-9) or exactly 0")
    assert ok


def test_6_dct_orthogonality(verdict):
    raw = [glyphs.dct_raw(64, u, v).ravel() for u, v in glyphs.dct_indices(6)]
    worst, pairs = 0.0, 0
    for a, b in itertools.combinations(raw, 2):
        worst = max(worst, abs(float(a @ b)) / (np.linalg.norm(a) * np.linalg.norm(b)))
        pairs += 1
    ok = pairs == 630 and worst <= 1e-6
    verdict(6, ok, f"{pairs} distinct pairs, max |normalized inner product| {worst:.1e} (<= 1e-6)")
    assert ok


def test_7_normalization_fixtures(verdict):
    checks = {
        "tatweel": corpus.normalize_text("كـتاب", "arabic") == ["كتاب"],
        "alif maqsura->yeh": corpus.normalize_text("على", "arabic") == ["علي"],
        "ta marbuta->teh": corpus.normalize_text("مدرسة", "arabic") == ["مدرست"],
        "hamza boundary": corpus.normalize_text("سماءنا", "arabic") == ["سما", "نا"]
        and corpus.count_bigrams(["باءب"], "arabic", 0).counts.sum() == 1,
        "I grave->I": corpus.normalize_text("Ѝ", "bulgarian") == ["и"],
    }
    doc499 = "ab " * 249 + "a"
    try:
        corpus.count_bigrams([doc499], "english", 500)
        checks["500-letter filter"] = False
    except corpus.EmptyCorpusError:
        checks["500-letter filter"] = corpus.count_bigrams([doc499 + "b"], "english", 500).counts.sum() == 250
    ok = all(checks.values())
    verdict(7, ok, ", ".join(f"{k} {'ok' if v else 'WRONG'}" for k, v in checks.items()))
    assert ok


def test_8_determinism_threads(english_run, tmp_path, verdict):
    _, out1, _ = english_run
    out8 = tmp_path / "eval8"
    pl.evaluate(pl.PipelineConfig(output_dir=str(out8), threads=8))
    names = sorted(os.listdir(out1))
    same = sorted(os.listdir(out8)) == names
    match, mismatch, errors = filecmp.cmpfiles(out1, out8, names, shallow=False)
    ok = same and not mismatch and not errors and len(match) == len(names)
    verdict(8, ok, f"{len(match)}/{len(names)} output files byte-identical between 1 and 8 threads")
    assert ok


def test_9_phosphene_regimes(verdict):
    img = np.zeros((64, 64))
    img[28:32, 28:32] = 1.0  # electrode (7, 7), centred at pixel (29.5, 29.5)
    g = GlyphBitmap(img)
    counts = {n: int((ph.render_percept(g, ph.preset(n)).pixels > 0.1).sum()) for n in ("low", "medium", "high")}
    low = ph.render_percept(g, ph.preset("low")).pixels[0:60, 0:60]
    rot = max(float(np.max(np.abs(low - np.rot90(low, k)))) for k in (1, 2, 3))
    ok = counts["low"] < counts["medium"] < counts["high"] and rot <= 1e-9
    verdict(9, ok, f"pixels above 0.1: low {counts['low']} < medium {counts['medium']} < high {counts['high']}; "
                   f"low-preset 90-degree rotation residual {rot:.1e} (<= 1e-9)")
    assert ok
