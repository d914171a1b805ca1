"""Distribution summaries, strategy rankings and least-squares regression."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .engine import InteractionRecord


@dataclass(frozen=True)
class DistributionSummary:
    count: int
    mean: float
    median: float
    variance: float
    skewness: float
    min: float
    q1: float
    q3: float
    max: float


def summarize(values: Iterable[float]) -> DistributionSummary:
    """Population moments and quartiles.

    Skewness is the moment coefficient ``m3 / m2**1.5`` and is 0 for constant
    data. Quartiles use linear interpolation; the median of an even count is
    the midpoint of the two central values.
    """
    x = np.asarray(list(values), dtype=float)
    if x.size == 0:
        raise ValueError("cannot summarize an empty list")
    mean = float(x.mean())
    dev = x - mean
    m2 = float(np.mean(dev**2))
    m3 = float(np.mean(dev**3))
    # relative cutoff keeps roundoff noise in near-constant data from
    # producing a huge skew
    scale = max(1.0, float(np.max(np.abs(x))))
    skew = 0.0 if m2 <= (1e-14 * scale) ** 2 else m3 / m2**1.5
    q1, med, q3 = np.percentile(x, [25, 50, 75])
    return DistributionSummary(
        int(x.size), mean, float(med), m2, float(skew),
        float(x.min()), float(q1), float(q3), float(x.max()),
    )


@dataclass(frozen=True)
class StrategyStanding:
    name: str
    mean_score: float
    wins: int
    losses: int
    ties: int


def rank_strategies(
    records: Iterable[InteractionRecord],
) -> tuple[list[StrategyStanding], list[StrategyStanding]]:
    """Standings ordered by mean per-turn score and by number of match wins.

    A win is a strictly higher total match score. Self-interactions are
    ignored. Equal keys fall back to alphabetical order of the name.
    """
    scores = defaultdict(list)
    tally = defaultdict(lambda: [0, 0, 0])
    for rec in records:
        if rec.name_a == rec.name_b:
            continue
        scores[rec.name_a].append(rec.score_a / rec.turns)
        scores[rec.name_b].append(rec.score_b / rec.turns)
        w = rec.winner
        tally[rec.name_a][0 if w == "a" else 1 if w == "b" else 2] += 1
        tally[rec.name_b][0 if w == "b" else 1 if w == "a" else 2] += 1
    if not scores:
        raise ValueError("no interactions between distinct strategies")
    table = [
        StrategyStanding(n, float(np.mean(s)), *tally[n]) for n, s in scores.items()
    ]
    by_score = sorted(table, key=lambda r: (-r.mean_score, r.name))
    by_wins = sorted(table, key=lambda r: (-r.wins, r.name))
    return by_score, by_wins


@dataclass(frozen=True)
class RegressionResult:
    features: tuple[str, ...]
    coefficients: np.ndarray
    intercept: float
    r_squared: float
    residual_variance: float
    standard_errors: np.ndarray  # intercept first, then one per feature

    def report(self) -> str:
        lines = [f"{'term':<16}{'coef':>14}{'std err':>14}"]
        lines.append(f"{'intercept':<16}{self.intercept:>14.6g}{self.standard_errors[0]:>14.6g}")
        for name, c, se in zip(self.features, self.coefficients, self.standard_errors[1:]):
            lines.append(f"{name:<16}{c:>14.6g}{se:>14.6g}")
        lines.append(f"R^2 = {self.r_squared:.6f}   residual variance = {self.residual_variance:.6g}")
        return "\n".join(lines)


def ols_fit(
    features, target: Sequence[float], names: Sequence[str] | None = None
) -> RegressionResult:
    """Ordinary least squares with an intercept, via the normal equations."""
    X = np.asarray(features, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(target, dtype=float)
    n, k = X.shape
    if y.shape != (n,):
        raise ValueError("target length does not match the number of rows")
    if n < k + 1:
        raise ValueError(f"need at least {k + 1} rows for {k} features")
    A = np.column_stack([np.ones(n), X])
    if np.linalg.matrix_rank(A) < k + 1:
        raise ValueError("feature matrix is rank deficient")
    gram = A.T @ A
    beta = np.linalg.solve(gram, A.T @ y)
    resid = y - A @ beta
    sse = float(resid @ resid)
    sst = float(np.sum((y - y.mean()) ** 2))
    r2 = 0.0 if sst == 0 else max(0.0, 1.0 - sse / sst)
    dof = n - k - 1
    sigma2 = sse / dof if dof > 0 else float("nan")
    se = np.sqrt(np.diag(np.linalg.inv(gram)) * sigma2)
    names = tuple(names) if names is not None else tuple(f"x{i + 1}" for i in range(k))
    return RegressionResult(names, beta[1:], float(beta[0]), r2, sigma2, se)
