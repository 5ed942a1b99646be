"""Cost and improvement-factor tables in plain text and CSV."""
from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field

import numpy as np


@dataclass
class PresetResult:
    """Costs for one language under one distortion setting (unscaled)."""

    distortion: str
    native: float | None
    random_mean: float
    random_std: float
    random_best: float
    optimized: float
    random_costs: list[float] = field(default_factory=list)
    methods: dict = field(default_factory=dict)

    def factor(self, cost: float) -> float:
        if self.native is None or cost <= 0:
            return float("nan") if self.native is None else float("inf")
        return self.native / cost

    def random_factor_stats(self) -> tuple[float, float]:
        if self.native is None or not self.random_costs:
            return float("nan"), float("nan")
        f = self.native / np.asarray(self.random_costs)
        return float(f.mean()), float(f.std())


@dataclass
class EvaluationReport:
    language: str
    rows: list[PresetResult]
    scale: float = 1e5

    def improvement(self) -> list[dict]:
        out = []
        for r in self.rows:
            fm, fs = r.random_factor_stats()
            out.append({
                "distortion": r.distortion,
                "native": 1.0 if r.native is not None else float("nan"),
                "random_mean": fm,
                "random_std": fs,
                "random_best": r.factor(r.random_best),
                "optimized": r.factor(r.optimized),
            })
        return out

    def to_dict(self) -> dict:
        # strict JSON has no NaN; undefined factors become null
        imp = [{k: (None if isinstance(v, float) and np.isnan(v) else v) for k, v in f.items()}
               for f in self.improvement()]
        return {"language": self.language, "scale": self.scale,
                "rows": [asdict(r) for r in self.rows], "improvement": imp}

    @classmethod
    def from_dict(cls, d: dict) -> "EvaluationReport":
        rows = [PresetResult(**r) for r in d["rows"]]
        return cls(d["language"], rows, d.get("scale", 1e5))


def fmt_cost(value, scale: float = 1e5) -> str:
    """Scaled cost rounded to an integer, e.g. 0.00054 at 1e5 -> '54'."""
    if value is None or not np.isfinite(value):
        return "-"
    return str(int(round(value * scale)))


def fmt_factor(value) -> str:
    if value is None or np.isnan(value):
        return "-"
    if np.isinf(value):
        return "inf"
    return f"{value:.1f}"


def _pm(mean, std) -> str:
    m = fmt_factor(mean)
    return m if m == "-" else f"{m} +/- {fmt_factor(std)}"


HEADERS = ("Distortion", "Native", "Randomized (mean +/- std)", "Randomized (best)", "Optimized")


def _table(title: str, body: list[list[str]]) -> str:
    widths = [max(len(HEADERS[c]), *(len(r[c]) for r in body)) if body else len(HEADERS[c])
              for c in range(len(HEADERS))]
    lines = [title]
    lines.append("  ".join(h.ljust(widths[0]) if c == 0 else h.rjust(widths[c]) for c, h in enumerate(HEADERS)))
    lines.append("-" * (sum(widths) + 2 * (len(widths) - 1)))
    for r in body:
        lines.append("  ".join(v.ljust(widths[0]) if c == 0 else v.rjust(widths[c]) for c, v in enumerate(r)))
    return "\n".join(lines)


def format_cost_table(reports: list[EvaluationReport], scale: float | None = None) -> str:
    blocks = []
    for rep in reports:
        s = rep.scale if scale is None else scale
        body = [[r.distortion.capitalize(), fmt_cost(r.native, s),
                 f"{fmt_cost(r.random_mean, s)} +/- {fmt_cost(r.random_std, s)}",
                 fmt_cost(r.random_best, s), fmt_cost(r.optimized, s)] for r in rep.rows]
        blocks.append(_table(f"Confusion cost, {rep.language} (values x {s:g})", body))
    return "\n\n".join(blocks) + "\n"


def format_factor_table(reports: list[EvaluationReport]) -> str:
    blocks = []
    for rep in reports:
        body = [[f["distortion"].capitalize(), fmt_factor(f["native"]), _pm(f["random_mean"], f["random_std"]),
                 fmt_factor(f["random_best"]), fmt_factor(f["optimized"])] for f in rep.improvement()]
        blocks.append(_table(f"Improvement factor (native / method cost), {rep.language}", body))
    return "\n\n".join(blocks) + "\n"


def format_csv(reports: list[EvaluationReport], scale: float | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["language", "distortion", "native", "random_mean", "random_std", "random_best",
                "optimized", "factor_random_mean", "factor_random_std", "factor_random_best",
                "factor_optimized"])
    for rep in reports:
        s = rep.scale if scale is None else scale
        for r, f in zip(rep.rows, rep.improvement()):
            w.writerow([rep.language, r.distortion,
                        fmt_cost(r.native, s), fmt_cost(r.random_mean, s), fmt_cost(r.random_std, s),
                        fmt_cost(r.random_best, s), fmt_cost(r.optimized, s),
                        fmt_factor(f["random_mean"]), fmt_factor(f["random_std"]),
                        fmt_factor(f["random_best"]), fmt_factor(f["optimized"])])
    return buf.getvalue()
