"""Command-line entry point.

Exit codes: 0 success, 2 bad input, 3 replicator integration did not converge.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from collections import defaultdict
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import (
    build_payoff_matrix,
    moran_fixation_analytic,
    moran_fixation_simulated,
    replicator_stationary,
)
from .engine import TournamentConfig, run_tournament
from .game import PayoffParams
from .reports import (
    DETECTION_COLUMNS,
    FIXATION_COLUMNS,
    STATIONARY_COLUMNS,
    SUMMARY_COLUMNS,
    InputError,
    ObservedMatch,
    atomic_open,
    detection_rows,
    fixation_row,
    group_sse,
    read_interactions,
    read_payoff_matrix,
    stationary_rows,
    summary_rows,
    write_interactions,
    write_manifest,
    write_payoff_matrix,
    write_rows,
)
from .stats import ols_fit, rank_strategies, summarize
from .strategies import CATALOG_VERSION, default_catalog, resolve, split_names
from .zd import Verdict, ZDFit, detect_extortion, extortion_factor

log = logging.getLogger("ipdzd")

EXIT_INPUT = 2
EXIT_NONCONVERGED = 3


def _common_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--turns", type=int, default=2000, help="turns per match (default 2000)")
    g.add_argument("--repetitions", type=int, default=60, help="repetitions per pair (default 60)")
    g.add_argument("--seed", type=int, default=0, help="master seed")
    g.add_argument("--payoffs", default="3,0,5,1", metavar="R,S,T,P")
    g.add_argument("--threads", type=int, default=1, help="worker processes")
    g.add_argument("--out", type=Path, default=Path("out"), metavar="DIR")
    g.add_argument("--sse-threshold", type=float, default=0.01)
    g.add_argument("--corpus", metavar="NAME[,NAME...]")
    g.add_argument("--corpus-file", type=Path, metavar="PATH")
    g.add_argument("--self-interactions", action="store_true",
                   help="also play each strategy against itself")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="ipdzd", description="IPD extortion detection toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("tournament", parents=[common], help="run a round robin and detect extortion")
    t.add_argument("--figure-data", action="store_true", help="also write fig1/fig2 plot data")

    d = sub.add_parser("detect", parents=[common], help="measure and fit histories from a CSV")
    d.add_argument("history_csv", type=Path)
    d.add_argument("--imputation", default="overall",
                   help="'overall' cooperation rate or a fixed probability")

    r = sub.add_parser("replicator", parents=[common], help="stationary replicator population")
    r.add_argument("matrix_csv", type=Path)
    r.add_argument("--tol", type=float, default=1e-10)
    r.add_argument("--t-max", type=float, default=1e5)

    m = sub.add_parser("moran", parents=[common], help="pairwise Moran fixation probabilities")
    mode = m.add_mutually_exclusive_group()
    mode.add_argument("--analytic", action="store_true", help="product formula (default)")
    mode.add_argument("--simulate", action="store_true", help="Monte Carlo with played matches")
    m.add_argument("--payoffs-abcd", metavar="a,b,c,d",
                   help="mean payoffs A-A, A-B, B-A, B-B (analytic only)")
    m.add_argument("--pair", metavar="A,B", help="invader A against resident B")
    m.add_argument("--same-strategy", metavar="NAME")
    m.add_argument("--N", default="2:20", help="size, list (3,5) or range (2:20)")
    m.add_argument("--trials", type=int, default=1000)

    a = sub.add_parser("analyze", parents=[common],
                       help="tournament, dynamics and regression in one run")
    a.add_argument("--tol", type=float, default=1e-10)
    a.add_argument("--t-max", type=float, default=1e5)
    a.add_argument("--N-max", type=int, default=20)

    sub.add_parser("catalog", help="list the built-in strategies")
    return parser


def _corpus(args):
    if args.corpus and args.corpus_file:
        raise InputError("use either --corpus or --corpus-file")
    if args.corpus_file:
        try:
            lines = args.corpus_file.read_text().splitlines()
        except OSError as exc:
            raise InputError(f"{args.corpus_file}: {exc.strerror}") from None
        names = [ln.split("#")[0].strip() for ln in lines]
        names = [n for n in names if n]
    elif args.corpus:
        names = split_names(args.corpus)
    else:
        return default_catalog()
    try:
        return [resolve(n) for n in names]
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _payoffs(args) -> PayoffParams:
    try:
        return PayoffParams.parse(args.payoffs)
    except ValueError as exc:
        raise InputError(f"--payoffs: {exc}") from None


def _flags(args) -> dict:
    return {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items())}


def _sizes(text: str) -> list[int]:
    try:
        if ":" in text:
            lo, hi = (int(v) for v in text.split(":"))
            sizes = list(range(lo, hi + 1))
        else:
            sizes = [int(v) for v in text.split(",")]
    except ValueError:
        raise InputError(f"bad --N value {text!r}") from None
    if not sizes or min(sizes) < 2:
        raise InputError("population sizes must be >= 2")
    return sizes


def _summary_table(rows, threshold: float):
    """Summary CSV rows for every focal strategy in a list of detection rows."""
    col = {c: i for i, c in enumerate(DETECTION_COLUMNS)}
    per = defaultdict(lambda: defaultdict(list))
    for r in rows:
        name = r[0]
        sse, chi = float(r[col["sse"]]), float(r[col["chi"]])
        per[name]["sse"].append(sse)
        if math.isfinite(chi):
            per[name]["chi"].append(chi)
        per[name]["score_per_turn"].append(float(r[col["score_per_turn_a"]]))
        per[name]["P_DD"].append(float(r[col["P_DD"]]))
        per[name]["wins"].append(1.0 if r[col["winner"]] == "a" else 0.0)
        fit_alpha, fit_beta = float(r[col["alpha"]]), float(r[col["beta"]])
        verdict = _verdict(fit_alpha, fit_beta, sse, threshold)
        per[name]["extortionate"].append(1.0 if verdict is Verdict.EXTORTIONATE else 0.0)
    out = []
    for name in sorted(per):
        for metric in ("sse", "chi", "score_per_turn", "P_DD", "wins", "extortionate"):
            if per[name][metric]:
                out.append(summary_rows(name, metric, summarize(per[name][metric])))
    return out


def _verdict(alpha, beta, sse, threshold):
    fit = ZDFit(alpha, beta, 0.0, extortion_factor(alpha, beta), sse, np.zeros(4))
    return detect_extortion(fit, threshold)


# --- subcommands -------------------------------------------------------------


def _play(args, include_self: bool):
    corpus = _corpus(args)
    if len(corpus) < 2:
        raise InputError("a tournament needs at least 2 strategies")
    cfg = TournamentConfig(
        corpus, args.turns, args.repetitions, args.seed, _payoffs(args), include_self
    )
    log.info("playing %d pairs x %d repetitions", len(cfg.pairs()), cfg.repetitions)
    return cfg, list(run_tournament(cfg, workers=args.threads))


def cmd_tournament(args) -> int:
    cfg, records = _play(args, args.self_interactions)
    out = args.out
    write_interactions(out / "interactions.csv", records)
    matches = [ObservedMatch(r.name_a, r.name_b, r.repetition, r.history) for r in records]
    det = list(detection_rows(matches, cfg.payoffs))
    write_rows(out / "detection.csv", DETECTION_COLUMNS, det)
    write_rows(out / "summary.csv", SUMMARY_COLUMNS, _summary_table(det, args.sse_threshold))
    outputs = [out / "interactions.csv", out / "detection.csv", out / "summary.csv"]
    if args.figure_data:
        outputs += _figure_1_2(out, records, det)
    write_manifest(out, "tournament", _flags(args), args.seed, CATALOG_VERSION, outputs=outputs)
    return 0


def _figure_1_2(out: Path, records, det) -> list[Path]:
    by_score, by_wins = rank_strategies(records)
    score_rank = {s.name: i for i, s in enumerate(by_score, 1)}
    wins_rank = {s.name: i for i, s in enumerate(by_wins, 1)}
    col = {c: i for i, c in enumerate(DETECTION_COLUMNS)}
    fig1 = [
        [r[0], r[1], r[2], r[col["sse"]], r[col["chi"]], score_rank.get(r[0], ""), wins_rank.get(r[0], "")]
        for r in det
        if r[0] != r[1]
    ]
    write_rows(out / "fig1_sse_by_strategy.csv",
               ["strategy", "opponent", "repetition", "sse", "chi", "score_rank", "wins_rank"], fig1)
    fig2 = [
        [r[0], r[1], r[2], r[col["sse"]], r[col["P_CC"]], r[col["P_CD"]], r[col["P_DC"]], r[col["P_DD"]]]
        for r in det
        if r[0] != r[1]
    ]
    write_rows(out / "fig2_states.csv",
               ["strategy", "opponent", "repetition", "sse", "P_CC", "P_CD", "P_DC", "P_DD"], fig2)
    return [out / "fig1_sse_by_strategy.csv", out / "fig2_states.csv"]


def cmd_detect(args) -> int:
    payoffs = _payoffs(args)
    imputation = args.imputation
    if imputation != "overall":
        try:
            imputation = float(imputation)
        except ValueError:
            raise InputError("--imputation must be 'overall' or a probability") from None
    try:
        matches = read_interactions(args.history_csv)
    except OSError as exc:
        raise InputError(f"{args.history_csv}: {exc.strerror}") from None
    for m in matches:
        if len(m.history) < 2:
            raise InputError(
                f"{m.name_a} vs {m.name_b} repetition {m.repetition}: insufficient history"
            )
    rows = list(detection_rows(matches, payoffs, imputation))
    out = args.out
    write_rows(out / "detection.csv", DETECTION_COLUMNS, rows)
    write_manifest(out, "detect", _flags(args), None, CATALOG_VERSION,
                   inputs=[args.history_csv], outputs=[out / "detection.csv"])
    return 0


def cmd_replicator(args) -> int:
    M = read_payoff_matrix(args.matrix_csv)
    res = replicator_stationary(M, tol=args.tol, t_max=args.t_max)
    out = args.out
    write_rows(out / "stationary.csv", STATIONARY_COLUMNS, stationary_rows(M, res.x))
    write_manifest(out, "replicator", _flags(args), None, CATALOG_VERSION,
                   inputs=[args.matrix_csv], outputs=[out / "stationary.csv"])
    if not res.converged:
        print(f"replicator dynamics did not converge by t={res.t:g}", file=sys.stderr)
        return EXIT_NONCONVERGED
    return 0


def _moran_pairs(args):
    if args.pair:
        names = split_names(args.pair)
        if len(names) != 2:
            raise InputError("--pair needs exactly two names")
        try:
            specs = [resolve(n) for n in names]
        except ValueError as exc:
            raise InputError(str(exc)) from None
        return [(specs[0], specs[1])]
    if args.same_strategy:
        try:
            spec = resolve(args.same_strategy)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        return [(spec, spec)]
    corpus = _corpus(args)
    return [(x, y) for x in corpus for y in corpus if x is not y]


def cmd_moran(args) -> int:
    sizes = _sizes(args.N)
    rows = []
    if args.payoffs_abcd:
        if args.simulate:
            raise InputError("--payoffs-abcd only applies to --analytic")
        try:
            a, b, c, d = (float(v) for v in args.payoffs_abcd.split(","))
        except ValueError:
            raise InputError("--payoffs-abcd needs four numbers") from None
        try:
            rows = [fixation_row("A", "B", moran_fixation_analytic(a, b, c, d, n)) for n in sizes]
        except ValueError as exc:
            raise InputError(str(exc)) from None
    elif args.simulate:
        payoffs = _payoffs(args)
        for x, y in _moran_pairs(args):
            for n in sizes:
                res = moran_fixation_simulated(
                    x, y, n, args.turns, args.trials, args.seed, payoffs, workers=args.threads
                )
                rows.append(fixation_row(x.name, y.name, res))
    else:
        pairs = _moran_pairs(args)
        specs = {}
        for x, y in pairs:
            specs.setdefault(x.name, x)
            specs.setdefault(y.name, y)
        if len(specs) == 1:
            # neutral: identical strategies have identical payoffs
            name = next(iter(specs))
            rows = [fixation_row(name, name, moran_fixation_analytic(1, 1, 1, 1, n)) for n in sizes]
        else:
            cfg = TournamentConfig(list(specs.values()), args.turns, args.repetitions,
                                   args.seed, _payoffs(args), True)
            M = build_payoff_matrix(run_tournament(cfg, workers=args.threads), cfg.payoffs)
            rows = _analytic_rows(M, [(x.name, y.name) for x, y in pairs], sizes)
    out = args.out
    write_rows(out / "fixation.csv", FIXATION_COLUMNS, rows)
    write_manifest(out, "moran", _flags(args), args.seed, CATALOG_VERSION,
                   outputs=[out / "fixation.csv"])
    return 0


def _analytic_rows(M, pairs, sizes):
    idx = {n: i for i, n in enumerate(M.names)}
    V = M.values
    rows = []
    for x, y in pairs:
        i, j = idx[x], idx[y]
        for n in sizes:
            res = moran_fixation_analytic(V[i, i], V[i, j], V[j, i], V[j, j], n)
            rows.append(fixation_row(x, y, res))
    return rows


def cmd_analyze(args) -> int:
    cfg, records = _play(args, True)
    out = args.out
    names = [s.name for s in cfg.corpus]
    M = build_payoff_matrix(records, cfg.payoffs, names)
    write_payoff_matrix(out / "payoff_matrix.csv", M)

    distinct = [r for r in records if r.name_a != r.name_b]
    matches = [ObservedMatch(r.name_a, r.name_b, r.repetition, r.history) for r in distinct]
    det = list(detection_rows(matches, cfg.payoffs))
    write_rows(out / "detection.csv", DETECTION_COLUMNS, det)
    write_rows(out / "summary.csv", SUMMARY_COLUMNS, _summary_table(det, args.sse_threshold))
    outputs = [out / "payoff_matrix.csv", out / "detection.csv", out / "summary.csv"]
    outputs += _figure_1_2(out, distinct, det)

    sse = group_sse(det)
    summaries = {n: summarize(sse[n]) for n in names}

    # strategies using the match length would be removed here; the catalog has none
    dyn_names = [s.name for s in cfg.corpus if not s.uses_match_length]
    Md = M.subset(dyn_names)
    res = replicator_stationary(Md, tol=args.tol, t_max=args.t_max)
    stat = stationary_rows(Md, res.x)
    write_rows(out / "stationary.csv", STATIONARY_COLUMNS, stat)
    write_rows(
        out / "fig3_replicator.csv",
        [*STATIONARY_COLUMNS, "sse_mean", "sse_median", "sse_variance", "sse_skewness"],
        ([*row, *_sse_features(summaries[row[0]])] for row in stat),
    )

    sizes = list(range(2, args.N_max + 1))
    pairs = [(x, y) for x in dyn_names for y in dyn_names if x != y]
    fix = _analytic_rows(Md, pairs, sizes)
    write_rows(out / "fixation.csv", FIXATION_COLUMNS, fix)
    norm = defaultdict(lambda: {"N=2": [], "N>2": []})
    for a, _, n, _, _, z in fix:
        norm[a]["N=2" if n == 2 else "N>2"].append(z)
    fig4 = [
        [name, group, float(np.mean(vals)), *_sse_features(summaries[name])]
        for name in dyn_names
        for group, vals in norm[name].items()
        if vals
    ]
    write_rows(out / "fig4_fixation.csv",
               ["strategy", "population", "mean_normalized_fixation",
                "sse_mean", "sse_median", "sse_variance", "sse_skewness"], fig4)
    outputs += [out / "stationary.csv", out / "fig3_replicator.csv",
                out / "fixation.csv", out / "fig4_fixation.csv"]

    feats = ["sse_mean", "sse_median", "sse_variance", "sse_skewness"]
    X = [_sse_features(summaries[n]) for n in dyn_names]
    station = {row[0]: row[2] for row in stat}
    report = [f"# OLS of replicator stationary probability on SSE summaries ({len(dyn_names)} strategies)"]
    report.append(_try_ols(X, [station[n] for n in dyn_names], feats))
    for group in ("N=2", "N>2"):
        target = [float(np.mean(norm[n][group])) for n in dyn_names]
        report.append(f"\n# OLS of mean normalized fixation ({group}) on SSE summaries")
        report.append(_try_ols(X, target, feats))
    with atomic_open(out / "regression.txt") as fh:
        fh.write("\n".join(report) + "\n")
    outputs.append(out / "regression.txt")

    write_manifest(out, "analyze", _flags(args), args.seed, CATALOG_VERSION, outputs=outputs)
    if not res.converged:
        print(f"replicator dynamics did not converge by t={res.t:g}", file=sys.stderr)
        return EXIT_NONCONVERGED
    return 0


def _sse_features(s):
    return [s.mean, s.median, s.variance, s.skewness]


def _try_ols(X, y, names):
    try:
        return ols_fit(X, y, names).report()
    except ValueError as exc:
        return f"not fitted: {exc}"


def cmd_catalog(args) -> int:
    for spec in default_catalog():
        print(f"{spec.name:<22}{spec.key}")
    return 0


COMMANDS = {
    "tournament": cmd_tournament,
    "detect": cmd_detect,
    "replicator": cmd_replicator,
    "moran": cmd_moran,
    "analyze": cmd_analyze,
    "catalog": cmd_catalog,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    for name in ("turns", "repetitions", "threads"):
        if getattr(args, name, 1) < 1:
            print(f"error: --{name} must be positive", file=sys.stderr)
            return EXIT_INPUT
    try:
        return COMMANDS[args.command](args)
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
