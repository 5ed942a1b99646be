"""Pipeline stages shared by the CLI subcommands and ``evaluate``.

All randomness descends from one top-level seed through named substreams,
so a stage run on its own reproduces exactly what ``evaluate`` computes.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from importlib import resources

from . import corpus as _corpus
from . import observer as _observer
from .assign import (Assignment, AssignmentError, brute_force, native_assignment,
                     optimize_alternating_lap, optimize_local_search, randomized_baseline)
from .glyphs import AtlasError, SymbolPool, builtin_pool, load_atlas
from .phosphene import PRESETS, ConfigError, DistortionParams, preset
from .report import EvaluationReport, PresetResult, format_cost_table, format_csv, format_factor_table
from .rng import substream_key
from .temporal import MixConfig

METHODS = ("native", "randomized", "hungarian_alt", "local_search", "brute_force")


def stage_seed(seed: int, *tags) -> int:
    """63-bit seed for one named stage, derived from the top-level seed."""
    return substream_key(int(seed), *tags) >> 1


def fixture_corpus(language: str) -> str:
    return str(resources.files("glyphassign") / "data" / "corpus" / language)


def load_pool(atlas: str | None, size: int = 64) -> SymbolPool:
    if atlas in (None, "", "builtin"):
        return builtin_pool(size)
    return load_atlas(atlas)


def resolve_distortion(spec, grid: int = 16, um_per_px: float = 100.0) -> tuple[str, DistortionParams]:
    """A preset name or ``{name?, rho_um, lambda_um}`` -> (name, params)."""
    if isinstance(spec, str):
        return spec, preset(spec, grid=grid, um_per_px=um_per_px)
    if isinstance(spec, dict):
        d = dict(spec)
        name = d.pop("name", "custom")
        if "preset" in d:
            return name if "name" in spec else d["preset"], preset(d.pop("preset"), grid=grid, um_per_px=um_per_px)
        d.setdefault("grid", grid)
        d.setdefault("um_per_px", um_per_px)
        return name, DistortionParams.from_dict(d)
    raise ConfigError(f"bad distortion entry {spec!r}")


def confusion_for(pool: SymbolPool, name: str, params: DistortionParams, seed: int,
                  trials: int = 500, alpha: float = 2.0, beta: float = 2.0, threads: int = 1):
    mix = MixConfig(alpha=alpha, beta=beta, seed=stage_seed(seed, "observer", name))
    cfg = _observer.ObserverConfig(params=params, trials_per_symbol=trials, mix=mix)
    return _observer.estimate_confusion(pool, cfg, threads=threads)


def check_labels(pool: SymbolPool, F: _observer.ConfusionMatrix):
    if tuple(pool.labels) != tuple(F.pool_labels):
        raise AtlasError("confusion matrix labels do not match the symbol pool")


@dataclass
class Solved:
    optimized: Assignment
    native: Assignment | None
    randomized: object
    alternating: Assignment
    local: Assignment | None
    extra: dict = field(default_factory=dict)


def solve(C, F, pool: SymbolPool, name: str, seed: int, method: str = "local_search",
          restarts: int = 50, n_seeds: int = 201, threads: int = 1) -> Solved:
    """All baselines plus the requested optimizer for one distortion setting.

    ``local_search`` starts from the native map, the alternating-LAP result and
    the best random map in addition to its own random restarts, so it can
    never end worse than any of them.
    """
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}; choose from {METHODS}")
    lang = C.alphabet.language
    try:
        nat = native_assignment(C.alphabet, pool, C, F)
    except AssignmentError:
        nat = None
    rb = randomized_baseline(C.alphabet, pool, C, F, n_seeds=n_seeds, seed=stage_seed(seed, "randomized", lang, name))
    starts = [nat.mapping] if nat is not None else []
    alt = optimize_alternating_lap(C, F, pool, restarts=restarts, seed=stage_seed(seed, "alternating_lap", lang, name),
                                   starts=starts, threads=threads)
    local = None
    if method == "local_search":
        local = optimize_local_search(C, F, pool, restarts=restarts, seed=stage_seed(seed, "local_search", lang, name),
                                      starts=starts + [alt.mapping, rb.best.mapping], threads=threads)
        opt = local
    elif method == "hungarian_alt":
        opt = alt
    elif method == "brute_force":
        opt = brute_force(C, F, pool)
    elif method == "native":
        if nat is None:
            raise AssignmentError(f"pool has no native family for {lang}")
        opt = nat
    else:
        opt = rb.best
    return Solved(opt, nat, rb, alt, local)


def assignment_json(a: Assignment, pool: SymbolPool, language: str | None = None) -> dict:
    d = {"language": language or a.alphabet.language, "method": a.method}
    if a.seed is not None:
        d["seed"] = a.seed
    d["cost"] = a.cost
    d["cost_x1e5"] = a.cost * 1e5
    d["mapping"] = [{"letter": a.alphabet.letters[i], "pool_index": p,
                     "family": pool[p].family, "name": pool[p].name} for i, p in enumerate(a.mapping)]
    return d


def _strict(obj):
    """Copy of ``obj`` with NaN and infinities replaced by None."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _strict(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_strict(v) for v in obj]
    return obj


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_strict(obj), fh, ensure_ascii=False, indent=2, sort_keys=False, allow_nan=False)
        fh.write("\n")


def pool_manifest(pool_spec: str | None, size: int = 64) -> dict:
    """A standalone manifest equivalent to ``pool_spec`` (paths made absolute)."""
    if pool_spec in (None, "", "builtin"):
        return {"size": size, "families": [
            {"family": "latin", "source": "dotmatrix_latin"},
            {"family": "braille", "source": "braille"},
            {"family": "dct", "source": "dct", "order": 6}]}
    with open(pool_spec, encoding="utf-8") as fh:
        spec = json.load(fh)
    base = os.path.dirname(os.path.abspath(pool_spec))
    for fam in spec.get("families", []):
        for e in fam.get("entries", []) or []:
            if "path" in e and not os.path.isabs(e["path"]):
                e["path"] = os.path.normpath(os.path.join(base, e["path"]))
    return spec


# ------------------------------------------------------------------ config --

@dataclass
class PipelineConfig:
    language: str = "english"
    corpus_path: str | None = None
    one_per_line: bool = False
    min_letters: int = 500
    atlas_manifest: str = "builtin"
    distortions: list = field(default_factory=lambda: ["low", "medium", "high"])
    trials: int = 500
    alpha: float = 2.0
    beta: float = 2.0
    seed: int = 0
    method: str = "local_search"
    restarts: int = 50
    n_seeds: int = 201
    output_dir: str = "results"
    threads: int = 1
    grid: int = 16
    um_per_px: float = 100.0

    @classmethod
    def from_dict(cls, d: dict, base_dir: str | None = None) -> "PipelineConfig":
        d = dict(d)
        kw = {}
        obs = d.pop("observer", {}) or {}
        sol = d.pop("solver", {}) or {}
        dist = d.pop("distortion", None)
        if dist is not None:
            kw["distortions"] = dist if isinstance(dist, list) else [dist]
        for k in ("trials", "alpha", "beta", "seed"):
            if k in obs:
                kw[k] = obs[k]
        for k in ("method", "restarts", "n_seeds"):
            if k in sol:
                kw[k] = sol[k]
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kw.update(d)
        cfg = cls(**kw)
        if base_dir:
            for attr in ("corpus_path", "atlas_manifest", "output_dir"):
                v = getattr(cfg, attr)
                if v and v != "builtin" and not os.path.isabs(v):
                    setattr(cfg, attr, os.path.join(base_dir, v))
        cfg.validate()
        return cfg

    def validate(self):
        _corpus.get_alphabet(self.language)
        for spec in self.distortions:
            resolve_distortion(spec, self.grid, self.um_per_px)
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if self.trials < 1 or self.restarts < 0 or self.n_seeds < 1 or self.threads < 1:
            raise ConfigError("trials, n_seeds, threads must be >= 1 and restarts >= 0")


def evaluate(cfg: PipelineConfig) -> EvaluationReport:
    """Run every stage and write all artifacts under ``cfg.output_dir``."""
    cfg.validate()
    out = cfg.output_dir
    os.makedirs(out, exist_ok=True)
    corpus_path = cfg.corpus_path or fixture_corpus(cfg.language)
    docs = _corpus.read_documents(corpus_path, cfg.one_per_line)
    C = _corpus.count_bigrams(docs, cfg.language, cfg.min_letters)
    _corpus.write_bigram_csv(C, os.path.join(out, "bigram.csv"))
    pool = load_pool(cfg.atlas_manifest)

    rows = []
    details = {}
    for spec in cfg.distortions:
        name, params = resolve_distortion(spec, cfg.grid, cfg.um_per_px)
        F = confusion_for(pool, name, params, cfg.seed, cfg.trials, cfg.alpha, cfg.beta, cfg.threads)
        _observer.write_confusion_csv(F, os.path.join(out, f"confusion_{name}.csv"))
        res = solve(C, F, pool, name, cfg.seed, cfg.method, cfg.restarts, cfg.n_seeds, cfg.threads)
        written = {"optimized": res.optimized, "randomized_best": res.randomized.best,
                   "hungarian_alt": res.alternating}
        if res.native is not None:
            written["native"] = res.native
        if res.local is not None:
            written["local_search"] = res.local
        for tag, a in written.items():
            write_json(os.path.join(out, f"assignment_{name}_{tag}.json"), assignment_json(a, pool))
        rows.append(PresetResult(
            distortion=name,
            native=res.native.cost if res.native is not None else None,
            random_mean=res.randomized.mean, random_std=res.randomized.std,
            random_best=res.randomized.best.cost, optimized=res.optimized.cost,
            random_costs=[a.cost for a in res.randomized.assignments],
            methods={k: {"method": a.method, "cost": a.cost} for k, a in written.items()}))
        details[name] = params.to_dict()

    rep = EvaluationReport(cfg.language, rows)
    payload = rep.to_dict()
    payload["distortion_params"] = details
    payload["pool_size"] = len(pool)
    write_json(os.path.join(out, "evaluation.json"), payload)
    with open(os.path.join(out, "report.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_cost_table([rep]) + "\n" + format_factor_table([rep]))
    with open(os.path.join(out, "report.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_csv([rep]))
    return rep


PRESET_HELP = "\n".join(f"  {k}: rho={int(r)} um, lambda={int(l)} um" for k, (r, l) in PRESETS.items())
