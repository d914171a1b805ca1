"""Extortion geometry and detection for memory-one behaviour.

Coordinates: a cooperation vector ``p`` is shifted to
``t = (p1 - 1, p2 - 1, p3, p4)``. Extortionate zero-determinant strategies
are exactly the points ``t = C @ (alpha, beta)`` where ``C`` is the 4x2
matrix of payoff differences built by :func:`design_matrix`; the fourth row
is zero, so ``p4 = 0`` on the subspace. Given any (possibly measured) ``p``
the least-squares ``(alpha, beta)`` and the squared residual (SSE) measure
how far the behaviour is from extortion-type ZD play.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .game import MatchHistory, MemoryOneVector, PayoffParams

VectorLike = Union[MemoryOneVector, "np.ndarray", tuple, list]

DEFAULT_SSE_THRESHOLD = 0.01


def transform(p: VectorLike) -> np.ndarray:
    """Shift a cooperation vector to ``(p1 - 1, p2 - 1, p3, p4)``."""
    v = np.asarray(tuple(p), dtype=float)
    if v.shape != (4,):
        raise ValueError("a memory-one vector has four components")
    return v - np.array([1.0, 1.0, 0.0, 0.0])


def design_matrix(payoffs: PayoffParams) -> np.ndarray:
    R, S, T, P = payoffs.as_tuple()
    return np.array(
        [
            [R - P, R - P],
            [S - P, T - P],
            [T - P, S - P],
            [0.0, 0.0],
        ]
    )


@dataclass(frozen=True)
class ZDFit:
    alpha: float
    beta: float
    gamma: float
    chi: float
    sse: float
    projected_vector: np.ndarray

    def normalized(self) -> "ZDFit":
        """Same fit with ``(alpha, beta)`` negated if ``alpha < 0``."""
        if self.alpha >= 0:
            return self
        return ZDFit(-self.alpha, -self.beta, -self.gamma, self.chi, self.sse, self.projected_vector)


def extortion_factor(alpha: float, beta: float) -> float:
    """``-beta / alpha``; infinite or nan when alpha is zero."""
    if alpha == 0.0:
        return math.nan if beta == 0.0 else math.copysign(math.inf, -beta)
    return -beta / alpha


def _normal_solve(payoffs: PayoffParams, target: np.ndarray):
    c = design_matrix(payoffs)
    # C^T C in closed form; det > 0 whenever S != T
    a11 = float(c[:, 0] @ c[:, 0])
    a12 = float(c[:, 0] @ c[:, 1])
    a22 = float(c[:, 1] @ c[:, 1])
    det = a11 * a22 - a12 * a12
    if det <= 1e-12 * max(a11 * a22, 1.0):
        raise ValueError("degenerate payoffs")
    b1, b2 = c.T @ target
    alpha = (a22 * b1 - a12 * b2) / det
    beta = (a11 * b2 - a12 * b1) / det
    return c, float(alpha), float(beta)


def fit_zd(p: VectorLike, payoffs: PayoffParams = PayoffParams()) -> ZDFit:
    """Least-squares projection of ``p`` onto the extortion subspace."""
    target = transform(p)
    c, alpha, beta = _normal_solve(payoffs, target)
    projected = c @ np.array([alpha, beta])
    residual = projected - target
    sse = float(residual @ residual)
    gamma = -payoffs.P * (alpha + beta)
    return ZDFit(alpha, beta, gamma, extortion_factor(alpha, beta), sse, projected)


def sse_matrix_form(p: VectorLike, payoffs: PayoffParams = PayoffParams()) -> float:
    """SSE written as ``t.t - t.C x*``; equal to the residual norm in exact arithmetic."""
    target = transform(p)
    c, alpha, beta = _normal_solve(payoffs, target)
    return float(target @ target - target @ (c @ np.array([alpha, beta])))


def project_onto_plane(p: VectorLike, payoffs: PayoffParams = PayoffParams()) -> np.ndarray:
    """Nearest point of the extortion subspace, in shifted coordinates."""
    return fit_zd(p, payoffs).projected_vector


def untransform(t: np.ndarray) -> np.ndarray:
    """Inverse of :func:`transform` (no clipping to [0, 1])."""
    return np.asarray(t, dtype=float) + np.array([1.0, 1.0, 0.0, 0.0])


def plane_p1(p2: float, p3: float, payoffs: PayoffParams = PayoffParams()) -> float:
    """The ``p1`` an extortionate strategy must have given ``p2`` and ``p3``."""
    R, S, T, P = payoffs.as_tuple()
    return ((R - P) * (p2 + p3) - R + T + S - P) / (S + T - 2 * P)


@dataclass(frozen=True)
class ExactCheck:
    extortionate: bool
    required_p1: float
    failed: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.extortionate


def is_extortionate_exact(
    p: VectorLike, payoffs: PayoffParams = PayoffParams(), tol: float = 1e-12
) -> ExactCheck:
    """Check the three algebraic conditions for exact extortion.

    ``failed`` names the conditions that do not hold: ``"p1"`` (off the
    plane), ``"p4"`` (nonzero) and ``"p2+p3"`` (not below 1 by more than tol).
    """
    p1, p2, p3, p4 = (float(v) for v in p)
    required = plane_p1(p2, p3, payoffs)
    failed = []
    if abs(p1 - required) > tol:
        failed.append("p1")
    if abs(p4) > tol:
        failed.append("p4")
    if not (1.0 - (p2 + p3) > tol):
        failed.append("p2+p3")
    return ExactCheck(not failed, required, tuple(failed))


def chi_closed_form(p: VectorLike, payoffs: PayoffParams = PayoffParams()) -> float:
    """Extortion factor of a plane member straight from its shifted ``p2``, ``p3``."""
    R, S, T, P = payoffs.as_tuple()
    t = transform(p)
    num = t[1] * (P - T) + t[2] * (S - P)
    den = t[1] * (P - S) + t[2] * (T - P)
    if den == 0.0:
        raise ValueError("chi undefined")
    return float(num / den)


class Verdict(str, enum.Enum):
    EXTORTIONATE = "extortionate"
    BOUNDARY = "boundary"
    NOT_EXTORTIONATE = "not_extortionate"

    def __str__(self) -> str:
        return self.value


def detect_extortion(fit: ZDFit, sse_threshold: float = DEFAULT_SSE_THRESHOLD) -> Verdict:
    if sse_threshold < 0:
        raise ValueError("sse_threshold must be >= 0")
    if not fit.sse <= sse_threshold:
        return Verdict.NOT_EXTORTIONATE
    fit = fit.normalized()
    if fit.alpha == 0.0:
        return Verdict.NOT_EXTORTIONATE
    if abs(fit.chi - 1.0) <= 1e-9:
        return Verdict.BOUNDARY
    if -fit.beta > fit.alpha:
        return Verdict.EXTORTIONATE
    return Verdict.NOT_EXTORTIONATE


@dataclass(frozen=True)
class MeasuredProfile:
    cooperation_counts: tuple[int, int, int, int]
    visit_counts: tuple[int, int, int, int]
    p_hat: MemoryOneVector
    imputed: tuple[bool, bool, bool, bool]
    overall_cooperation_rate: float


def measure_memory_one(
    history: MatchHistory, focal: str = "a", imputation: str | float = "overall"
) -> MeasuredProfile:
    """Empirical memory-one vector of one side of a match.

    ``focal`` is ``"a"`` (the history's focal column) or ``"b"``. States never
    visited are filled with the player's cooperation rate over all turns
    (``imputation="overall"``) or with a fixed probability.
    """
    if focal not in ("a", "b"):
        raise ValueError("focal must be 'a' or 'b'")
    if len(history) < 2:
        raise ValueError("insufficient history")
    h = history if focal == "a" else history.transpose()
    states = h.state_codes()[:-1]
    coop_next = h.focal[1:] == 0
    visits = np.bincount(states, minlength=4)
    coops = np.bincount(states, weights=coop_next, minlength=4).astype(np.int64)
    rate = float(np.mean(h.focal == 0))
    if imputation == "overall":
        fill = rate
    else:
        fill = float(imputation)
        if not 0.0 <= fill <= 1.0:
            raise ValueError("imputed probability must lie in [0, 1]")
    p_hat = [coops[i] / visits[i] if visits[i] else fill for i in range(4)]
    return MeasuredProfile(
        tuple(int(v) for v in coops),
        tuple(int(v) for v in visits),
        MemoryOneVector(*(float(v) for v in p_hat)),
        tuple(bool(v == 0) for v in visits),
        rate,
    )
