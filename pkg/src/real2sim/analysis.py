"""Correlation statistics and the real/sim/gap report table."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .deteval import gap_percent
from .errors import DegenerateError, MissingBaselineError


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient, clamped into [-1, 1]."""
    xs = np.asarray(x, dtype=np.float64)
    ys = np.asarray(y, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise DegenerateError("x and y must be 1-D sequences of equal length")
    if len(xs) < 3:
        raise DegenerateError(f"need at least 3 points, got {len(xs)}")
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateError("zero variance in an input")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def rank_with_ties(values: Sequence[float]) -> np.ndarray:
    """1-based ranks, tied values receiving the average of their ranks."""
    vals = np.asarray(values, dtype=np.float64)
    order = np.argsort(vals, kind="stable")
    ranks = np.empty(len(vals), dtype=np.float64)
    i = 0
    while i < len(vals):
        j = i
        while j + 1 < len(vals) and vals[order[j + 1]] == vals[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman rank correlation: Pearson on average-tie ranks."""
    return pearson(rank_with_ties(x), rank_with_ties(y))


@dataclass(frozen=True)
class CorrelationResult:
    metric_name: str
    pearson_r: float
    spearman_rho: float
    n_scenes: int
    points: tuple[tuple[float, float], ...]

    def to_json(self) -> dict:
        return {
            "metric_name": self.metric_name,
            "pearson_r": self.pearson_r,
            "spearman_rho": self.spearman_rho,
            "n_scenes": self.n_scenes,
            "points": [list(p) for p in self.points],
        }


def correlate_metric(metric_name: str, points: Sequence[tuple[float, float]]) -> CorrelationResult:
    """Correlation of a per-scene metric against DA over (metric, da) points."""
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    return CorrelationResult(
        metric_name=metric_name,
        pearson_r=pearson(xs, ys),
        spearman_rho=spearman(xs, ys),
        n_scenes=len(points),
        points=tuple((float(a), float(b)) for a, b in points),
    )


@dataclass(frozen=True)
class GapTable:
    """Real / Sim / Gap(%) rows per fine-tuning method."""

    columns: tuple[str, ...]
    methods: tuple[str, ...]
    rows: dict[tuple[str, str], dict[str, float]]  # (method, row kind) -> metric -> value

    def to_markdown(self) -> str:
        header = "| Fine-tuning method | Evaluation data | " + " | ".join(self.columns) + " |"
        rule = "|" + " --- |" * (len(self.columns) + 2)
        lines = [header, rule]
        for method in self.methods:
            for kind, label in (("real", "Real"), ("sim", "Sim"), ("gap", "Gap (%)")):
                cells = [f"{self.rows[(method, kind)][c]:.1f}" for c in self.columns]
                lines.append(f"| {method} | {label} | " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        lines = ["method,eval_data," + ",".join(self.columns)]
        for method in self.methods:
            for kind in ("real", "sim", "gap"):
                cells = [repr(self.rows[(method, kind)][c]) for c in self.columns]
                lines.append(f"{method},{kind}," + ",".join(cells))
        return "\n".join(lines) + "\n"


def gap_table(
    results: Sequence[tuple[str, str, Mapping[str, float]]],
    baseline: str | None = None,
) -> GapTable:
    """Assemble Real/Sim/Gap rows from (method, eval_data, metrics) triples.

    Gaps are computed against the baseline method's Real row (default: the
    first method seen), matching the convention that the gap is the drop
    relative to the unaugmented model's real-world performance.
    """
    methods: list[str] = []
    by_key: dict[tuple[str, str], dict[str, float]] = {}
    for method, eval_data, metrics in results:
        if eval_data not in ("real", "sim"):
            raise MissingBaselineError(f"eval_data must be 'real' or 'sim', got {eval_data!r}")
        if method not in methods:
            methods.append(method)
        by_key[(method, eval_data)] = dict(metrics)

    if not methods:
        raise MissingBaselineError("no results given")
    baseline = baseline or methods[0]
    base_real = by_key.get((baseline, "real"))
    if base_real is None:
        raise MissingBaselineError(f"baseline method {baseline!r} has no real row")

    columns = tuple(base_real)
    rows: dict[tuple[str, str], dict[str, float]] = {}
    for method in methods:
        real = by_key.get((method, "real"))
        sim = by_key.get((method, "sim"))
        if real is None or sim is None:
            raise MissingBaselineError(f"method {method!r} needs both real and sim rows")
        missing = [c for c in columns if c not in real or c not in sim]
        if missing:
            raise MissingBaselineError(f"method {method!r} lacks metrics {missing}")
        rows[(method, "real")] = {c: float(real[c]) for c in columns}
        rows[(method, "sim")] = {c: float(sim[c]) for c in columns}
        rows[(method, "gap")] = {
            c: gap_percent(base_real[c], float(sim[c])) for c in columns
        }
    return GapTable(columns=columns, methods=tuple(methods), rows=rows)
