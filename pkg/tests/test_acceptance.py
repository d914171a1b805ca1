"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The desk-scale tournament (20 strategies, 2000 turns, 60 repetitions) is
played once per session and shared by criteria 4 and 5.
"""
from collections import defaultdict
from fractions import Fraction as F

import numpy as np
import pytest

from ipdzd.cli import main
from ipdzd.dynamics import (
    build_payoff_matrix,
    moran_fixation_analytic,
    moran_fixation_simulated,
    replicator_stationary,
)
from ipdzd.engine import TournamentConfig, mix_seed, play_match, run_tournament
from ipdzd.game import PayoffParams, state_distribution
from ipdzd.stats import rank_strategies, summarize
from ipdzd.strategies import Classic, MemoryOne, default_catalog
from ipdzd.zd import (
    chi_closed_form,
    fit_zd,
    is_extortionate_exact,
    measure_memory_one,
    plane_p1,
    sse_matrix_form,
)

SEED = 0
GAME = PayoffParams()


def rational_fit(p):
    """alpha, beta, sse for (3,0,5,1) in exact arithmetic."""
    t = [F(p[0]) - 1, F(p[1]) - 1, F(p[2]), F(p[3])]
    C = [[2, 2], [-1, 4], [4, -1], [0, 0]]
    g11 = sum(r[0] * r[0] for r in C)
    g12 = sum(r[0] * r[1] for r in C)
    g22 = sum(r[1] * r[1] for r in C)
    b1 = sum(r[0] * v for r, v in zip(C, t))
    b2 = sum(r[1] * v for r, v in zip(C, t))
    det = g11 * g22 - g12 * g12
    alpha = (g22 * b1 - g12 * b2) / det
    beta = (g11 * b2 - g12 * b1) / det
    sse = sum((r[0] * alpha + r[1] * beta - v) ** 2 for r, v in zip(C, t))
    return alpha, beta, sse


@pytest.fixture(scope="module")
def desk_tournament():
    corpus = default_catalog()
    cfg = TournamentConfig(corpus, turns=2000, repetitions=60, master_seed=SEED,
                           include_self_interactions=True)
    records = list(run_tournament(cfg))
    sse = defaultdict(list)
    for r in records:
        if r.name_a == r.name_b:
            continue
        for side, name in (("a", r.name_a), ("b", r.name_b)):
            sse[name].append(fit_zd(measure_memory_one(r.history, side).p_hat).sse)
    return corpus, records, sse


def test_criterion_1_exact_fit_values(criterion):
    fit = fit_zd((1, 1, 1, 1), GAME)
    alpha, beta, sse = rational_fit((1, 1, 1, 1))
    assert (sse, -beta / alpha) == (F(21, 17), F(1, 16))
    criterion(1, "fit of (1,1,1,1)", [
        ("sse~1.235", abs(fit.sse - 1.235) <= 5e-4 + 1e-12),
        ("chi~0.063", abs(fit.chi - 0.063) <= 5e-4 + 1e-12),
        ("sse=21/17", abs(fit.sse - 21 / 17) <= 1e-12),
        ("chi=1/16", abs(fit.chi - 1 / 16) <= 1e-12),
    ])


def test_criterion_2_extort2_exactness(criterion):
    fit = fit_zd((8 / 9, 1 / 2, 1 / 3, 0))
    ext = is_extortionate_exact((8 / 9, 1 / 2, 1 / 3, 0))
    quarter = is_extortionate_exact((0.25, 0.25, 0.25, 0.25))
    criterion(2, "Extort-2 exactness", [
        ("sse<=1e-12", fit.sse <= 1e-12),
        ("chi=2", abs(fit.chi - 2) <= 1e-9),
        ("exact check passes", bool(ext)),
        ("rhs=8/9", F(plane_p1(F(1, 2), F(1, 3))).limit_denominator(10**6) == F(8, 9)),
        ("quarter fails", not quarter),
        ("quarter rhs=2/3", F(plane_p1(F(1, 4), F(1, 4))).limit_denominator(10**6) == F(2, 3)),
    ])


def test_criterion_3_plane_properties(criterion):
    rng = np.random.default_rng(SEED)
    worst_sse = worst_chi = 0.0
    sampled = 0
    while sampled < 1000:
        p2, p3 = rng.random(2)
        if p2 + p3 >= 1:
            continue
        p = (plane_p1(p2, p3), p2, p3, 0.0)
        fit = fit_zd(p)
        worst_sse = max(worst_sse, fit.sse)
        worst_chi = max(worst_chi, abs(chi_closed_form(p) - (-fit.beta / fit.alpha)))
        sampled += 1
    worst_eq = max(
        abs(fit_zd(p).sse - sse_matrix_form(p)) for p in rng.random((1000, 4))
    )
    criterion(3, "plane property suite", [
        (f"max sse {worst_sse:.1e}<1e-10", worst_sse < 1e-10),
        (f"max chi gap {worst_chi:.1e}<=1e-8", worst_chi <= 1e-8),
        (f"max sse form gap {worst_eq:.1e}<=1e-10", worst_eq <= 1e-10),
    ])


def test_criterion_4_desk_tournament(criterion, desk_tournament):
    corpus, records, sse = desk_tournament
    ext = summarize(sse["Extort-2"])
    by_score, _ = rank_strategies(records)
    top = by_score[0].name
    top_skew = summarize(sse[top]).skewness
    p_dd = [
        state_distribution(r.history)[3]
        for r in records
        if {r.name_a, r.name_b} == {"Extort-2", "Defector"}
    ]
    criterion(4, "desk-scale tournament", [
        (f"Extort-2 median sse {ext.median:.4f}<0.05", ext.median < 0.05),
        (f"Extort-2 skew {ext.skewness:.3f}>0", ext.skewness > 0),
        (f"top scorer {top} skew {top_skew:.3f}<0", top_skew < 0),
        (f"min P(DD) vs Defector {min(p_dd):.3f}>0.9", min(p_dd) > 0.9),
    ])


def test_criterion_5_replicator(criterion, desk_tournament):
    dom = replicator_stationary([[1, 0], [2, 1]])
    mixed = replicator_stationary([[0, 3], [1, 0]])
    corpus, records, _ = desk_tournament
    M = build_payoff_matrix(records, GAME, [s.name for s in corpus])
    res = replicator_stationary(M, record=True)
    rng = np.random.default_rng(SEED)
    runs = [res, replicator_stationary(rng.uniform(0, 5, (8, 8)), record=True)]
    drift = max(abs(x.sum() - 1) + max(0.0, -x.min()) for r in runs for _, x in r.trajectory)
    by_score, _ = rank_strategies(records)
    rank = {s.name: i for i, s in enumerate(by_score, 1)}
    cutoff = len(corpus) / 3
    survivors = [(n, rank[n]) for n, v in zip(M.names, res.x) if v > 1e-2]
    outside = [f"{n}(#{k})" for n, k in survivors if k > cutoff]
    criterion(5, "replicator checks", [
        ("dominance->(0,1)", dom.converged and np.allclose(dom.x, [0, 1], atol=1e-6)),
        ("mixed->(3/4,1/4)", mixed.converged and np.allclose(mixed.x, [0.75, 0.25], atol=1e-3)),
        (f"simplex drift {drift:.1e}<=1e-9", drift <= 1e-9),
        ("desk matrix converged", res.converged),
        (f"survivors in top third (outside: {', '.join(outside) or 'none'})", not outside),
    ])


def test_criterion_6_moran(criterion):
    neutral = all(moran_fixation_analytic(1, 1, 1, 1, n).x1 == 1 / n for n in range(2, 21))
    hand = moran_fixation_analytic(1, 5, 0, 3, 3).x1
    checks = [("neutral 1/N", neutral), ("hand case 10/13", abs(hand - 10 / 13) <= 1e-12)]
    # (invader, resident, N, turns, exact mean payoffs a, b, c, d)
    cases = [
        (Classic("Defector"), Classic("Cooperator"), 3, 10, (1, 5, 0, 3)),
        (Classic("Cooperator"), Classic("Defector"), 3, 10, (3, 0, 5, 1)),
        (Classic("Cooperator"), Classic("Cooperator"), 4, 10, (3, 3, 3, 3)),
        (Classic("Random"), Classic("Cooperator"), 3, 100, (2.25, 4, 1.5, 3)),
    ]
    for k, (a, b, n, turns, abcd) in enumerate(cases):
        expected = moran_fixation_analytic(*abcd, n).x1
        sim = moran_fixation_simulated(a, b, n, turns=turns, trials=10_000, seed=mix_seed(SEED, k))
        se = sim.standard_error if sim.standard_error > 0 else np.sqrt(
            expected * (1 - expected) / 10_000)
        z = abs(sim.x1 - expected) / se if se > 0 else 0.0
        checks.append((f"{a.name} in {b.name} N={n}: {sim.x1:.4f} vs {expected:.4f} z={z:.2f}",
                       z <= 3))
    criterion(6, "Moran fixation", checks)


def test_criterion_7_determinism(criterion, tmp_path):
    corpus = "Extort-2,Random,GTFT,StochasticWSLS,TitForTat,Joss,Defector,HardTitForTat"
    outputs = {}
    for threads in (1, 2, 8):
        out = tmp_path / f"t{threads}"
        code = main(["tournament", "--corpus", corpus, "--turns", "300", "--repetitions", "4",
                     "--seed", "11", "--threads", str(threads), "--out", str(out)])
        assert code == 0
        outputs[threads] = tuple(
            (out / name).read_bytes() for name in ("interactions.csv", "detection.csv")
        )
    criterion(7, "determinism across workers", [
        ("2 workers identical", outputs[2] == outputs[1]),
        ("8 workers identical", outputs[8] == outputs[1]),
    ])


def test_criterion_8_measurement_convergence(criterion):
    rng = np.random.default_rng(SEED)
    tft = Classic("TitForTat")
    misses, checked, worst = [], 0, 0.0
    for k in range(20):
        p = rng.random(4)
        h = play_match(MemoryOne(tuple(p)), tft, 2000, mix_seed(SEED, k))
        prof = measure_memory_one(h)
        for i, (visits, est) in enumerate(zip(prof.visit_counts, prof.p_hat)):
            if visits < 100:
                continue
            checked += 1
            err = abs(est - p[i])
            worst = max(worst, err)
            if err > 0.05:
                misses.append(f"#{k} state {i} err {err:.3f} n={visits}")
    criterion(8, "measurement convergence", [
        (f"{checked} states, worst {worst:.3f}, misses: {'; '.join(misses) or 'none'}",
         not misses),
    ])


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
