"""Population dynamics: replicator equation and pairwise Moran fixation."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .engine import InteractionRecord, mix_seed, play_match
from .game import PayoffParams, mean_scores
from .strategies import StrategySpec


@dataclass(frozen=True)
class PayoffMatrix:
    """``values[i, j]``: mean per-turn score of strategy i against strategy j."""

    names: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        n = len(self.names)
        if values.shape != (n, n):
            raise ValueError(f"payoff matrix must be {n}x{n}, got {values.shape}")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "values", values)

    def subset(self, keep: Sequence[str]) -> "PayoffMatrix":
        idx = [self.names.index(k) for k in keep]
        return PayoffMatrix(tuple(keep), self.values[np.ix_(idx, idx)])


def build_payoff_matrix(
    records: Iterable[InteractionRecord],
    payoffs: PayoffParams = PayoffParams(),
    names: Sequence[str] | None = None,
) -> PayoffMatrix:
    """Average per-turn scores over repetitions for every ordered pair.

    Self-play records fill the diagonal with the mean of both seats.
    """
    sums: dict[tuple[str, str], list[float]] = {}
    seen: list[str] = []
    for rec in records:
        sa, sb = mean_scores(rec.history, payoffs)
        for n in (rec.name_a, rec.name_b):
            if n not in seen:
                seen.append(n)
        if rec.name_a == rec.name_b:
            sums.setdefault((rec.name_a, rec.name_a), []).extend((sa, sb))
        else:
            sums.setdefault((rec.name_a, rec.name_b), []).append(sa)
            sums.setdefault((rec.name_b, rec.name_a), []).append(sb)
    names = tuple(names) if names is not None else tuple(seen)
    missing = [(a, b) for a in names for b in names if (a, b) not in sums]
    if missing:
        shown = ", ".join(f"{a} vs {b}" for a, b in missing[:10])
        more = f" (+{len(missing) - 10} more)" if len(missing) > 10 else ""
        raise ValueError(f"no interactions recorded for: {shown}{more}")
    values = np.array([[np.mean(sums[(a, b)]) for b in names] for a in names])
    return PayoffMatrix(names, values)


# --- replicator dynamics --------------------------------------------------

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)


def replicator_field(S: np.ndarray, x: np.ndarray) -> np.ndarray:
    sx = S @ x
    return x * (sx - x @ sx)


@dataclass
class ReplicatorResult:
    x: np.ndarray
    t: float
    converged: bool
    steps: int
    trajectory: list[tuple[float, np.ndarray]] = field(default_factory=list)


def _check_simplex(x: np.ndarray, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise ValueError(f"population vector must have {n} entries")
    if np.any(x < 0) or abs(x.sum() - 1.0) > 1e-9:
        raise ValueError("initial population must lie on the simplex")
    return x


def replicator_stationary(
    S,
    x0=None,
    tol: float = 1e-10,
    t_max: float = 1e5,
    rtol: float | None = None,
    atol: float | None = None,
    record: bool = False,
) -> ReplicatorResult:
    """Integrate the replicator equation until the field vanishes.

    Stops when ``max |dx/dt| < tol`` (``converged=True``) or at ``t_max``.
    Each accepted step clips negative shares to zero and renormalises.
    Step-size tolerances default to values tied to ``tol``: a looser local
    error control makes the step size hover at the stability limit and the
    field stalls above a tight ``tol``.
    """
    S = np.asarray(S.values if isinstance(S, PayoffMatrix) else S, dtype=float)
    n = S.shape[0]
    if S.shape != (n, n):
        raise ValueError("payoff matrix must be square")
    if tol <= 0:
        raise ValueError("tol must be positive")
    rtol = min(1e-9, tol) if rtol is None else rtol
    atol = min(1e-13, rtol / 10) if atol is None else atol
    x = _check_simplex(np.full(n, 1.0 / n) if x0 is None else x0, n).copy()
    t, steps = 0.0, 0
    trajectory = [(0.0, x.copy())] if record else []
    f = replicator_field(S, x)
    h = 0.1 / max(1.0, float(np.abs(S).max()))
    while np.abs(f).max() >= tol:
        if t >= t_max:
            return ReplicatorResult(x, t, False, steps, trajectory)
        h = min(h, t_max - t)
        k = [f]
        for i in range(1, 7):
            xi = x + h * sum(a * kj for a, kj in zip(_A[i], k))
            k.append(replicator_field(S, xi))
        K = np.array(k)
        x5 = x + h * (_B5 @ K)
        x4 = x + h * (_B4 @ K)
        scale = atol + rtol * np.maximum(np.abs(x), np.abs(x5))
        err = float(np.max(np.abs(x5 - x4) / scale))
        if err <= 1.0:
            t += h
            steps += 1
            x = np.clip(x5, 0.0, None)
            x /= x.sum()
            f = replicator_field(S, x)
            if record:
                trajectory.append((t, x.copy()))
        factor = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        h *= factor
    return ReplicatorResult(x, t, True, steps, trajectory)


# --- Moran process ----------------------------------------------------------


@dataclass(frozen=True)
class FixationResult:
    N: int
    x1: float
    standard_error: float = 0.0
    method: str = "analytic"

    @property
    def normalized(self) -> float:
        return self.N * self.x1


def _fitness(a, b, c, d, N, j):
    """Mean payoff of an invader (f) and a resident (g) with j invaders."""
    f = (a * (j - 1) + b * (N - j)) / (N - 1)
    g = (c * j + d * (N - j - 1)) / (N - 1)
    return f, g


def moran_fixation_analytic(a: float, b: float, c: float, d: float, N: int) -> FixationResult:
    """Fixation probability of one A mutant among N-1 B residents.

    ``a``: A vs A, ``b``: A vs B, ``c``: B vs A, ``d``: B vs B mean payoffs.
    Fitness is the raw mean payoff against the other N-1 individuals.
    """
    if N < 2:
        raise ValueError("population size must be >= 2")
    if min(a, b, c, d) < 0:
        raise ValueError("nonpositive fitness: payoffs must be >= 0")
    total, prod = 1.0, 1.0
    for j in range(1, N):
        f, g = _fitness(a, b, c, d, N, j)
        if f == 0 and g == 0:
            raise ValueError(f"nonpositive fitness: population with {j} invaders has zero fitness")
        if f == 0:
            # invader can never reproduce from this state
            return FixationResult(N, 0.0)
        prod *= g / f
        total += prod
    return FixationResult(N, 1.0 / total)


def _moran_trial(args) -> bool:
    a, b, N, turns, seed, payoffs, cache = args
    rng = np.random.default_rng(seed)
    specs = (a, b)
    deterministic = cache is not None

    def match(ti, tj, step, i, j):
        if deterministic:
            return cache[(ti, tj)]
        h = play_match(specs[ti], specs[tj], turns, mix_seed(seed, step, i, j))
        return mean_scores(h, payoffs)

    types = [0] + [1] * (N - 1)
    mutants, step = 1, 0
    while 0 < mutants < N:
        fitness = np.zeros(N)
        if deterministic:
            # identical individuals of one type share a payoff; avoid N^2 matches
            aa = match(0, 0, 0, 0, 0)[0] if mutants > 1 else 0.0
            ab, ba = match(0, 1, 0, 0, 1) if mutants < N else (0.0, 0.0)
            bb = match(1, 1, 0, 0, 0)[0] if N - mutants > 1 else 0.0
            fa = (aa * (mutants - 1) + ab * (N - mutants)) / (N - 1)
            fb = (ba * mutants + bb * (N - mutants - 1)) / (N - 1)
            fitness = np.where(np.array(types) == 0, fa, fb)
        else:
            for i in range(N):
                for j in range(i + 1, N):
                    si, sj = match(types[i], types[j], step, i, j)
                    fitness[i] += si
                    fitness[j] += sj
            fitness /= N - 1
        total = fitness.sum()
        if total <= 0:
            raise ValueError("nonpositive fitness: whole population has zero payoff")
        parent = int(np.searchsorted(np.cumsum(fitness), rng.random() * total, side="right"))
        parent = min(parent, N - 1)
        dead = int(rng.integers(N))
        types[dead] = types[parent]
        mutants = types.count(0)
        step += 1
    return mutants == N


def moran_fixation_simulated(
    a: StrategySpec,
    b: StrategySpec,
    N: int,
    turns: int = 200,
    trials: int = 1000,
    seed: int = 0,
    payoffs: PayoffParams = PayoffParams(),
    workers: int = 1,
) -> FixationResult:
    """Monte Carlo Moran process with match-based fitness.

    Each trial starts from one ``a`` among ``N - 1`` ``b``. Every step plays
    the pairwise matches, picks a parent with probability proportional to
    mean payoff and replaces a uniformly chosen individual. Trial ``k`` uses
    seed ``mix_seed(seed, k)``.
    """
    if N < 2 or trials < 1 or turns < 1:
        raise ValueError("need N >= 2, trials >= 1 and turns >= 1")
    cache = None
    if not (a.stochastic or b.stochastic):
        # deterministic matches do not depend on the seed: play each type pair once
        specs = (a, b)
        cache = {
            (i, j): mean_scores(play_match(specs[i], specs[j], turns, seed), payoffs)
            for i, j in ((0, 0), (0, 1), (1, 1))
        }
    tasks = [(a, b, N, turns, mix_seed(seed, k), payoffs, cache) for k in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_moran_trial, tasks, chunksize=max(1, trials // (8 * workers))))
    else:
        outcomes = [_moran_trial(t) for t in tasks]
    x1 = sum(outcomes) / trials
    se = math.sqrt(x1 * (1 - x1) / trials)
    return FixationResult(N, x1, se, "simulated")
