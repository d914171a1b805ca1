"""CSV and JSON artifacts: schemas, readers, writers."""
from __future__ import annotations

import contextlib
import csv
import hashlib
import io
import json
import math
import os
import tempfile
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .dynamics import FixationResult, PayoffMatrix
from .engine import InteractionRecord
from .game import Action, MatchHistory, PayoffParams, mean_scores, state_distribution
from .stats import DistributionSummary
from .zd import fit_zd, measure_memory_one

INTERACTION_COLUMNS = ("player_a", "player_b", "repetition", "turn", "action_a", "action_b")
DETECTION_COLUMNS = (
    "player_a", "player_b", "repetition",
    "p1", "p2", "p3", "p4", "v1", "v2", "v3", "v4",
    "alpha", "beta", "chi", "sse",
    "P_CC", "P_CD", "P_DC", "P_DD",
    "score_per_turn_a", "score_per_turn_b", "winner",
)
SUMMARY_COLUMNS = (
    "strategy", "metric", "count", "mean", "median", "variance", "skewness", "min", "q1", "q3", "max",
)
STATIONARY_COLUMNS = ("strategy", "score_rank", "stationary_probability")
FIXATION_COLUMNS = ("strategy_a", "strategy_b", "N", "x1", "stderr", "normalized")


class InputError(ValueError):
    """Malformed user-supplied input file."""


def fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(value)


@contextlib.contextmanager
def atomic_open(path: Path):
    """Text handle whose content replaces ``path`` only on clean exit."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with atomic_open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def file_digest(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir: Path, command: str, flags: dict, seed, catalog_version: str,
                   inputs: Sequence[Path] = (), outputs: Sequence[Path] = ()) -> Path:
    manifest = {
        "command": command,
        "flags": flags,
        "seed": seed,
        "catalog_version": catalog_version,
        "input_digests": {str(p): file_digest(p) for p in inputs},
        "outputs": {Path(p).name: file_digest(p) for p in outputs},
    }
    path = Path(out_dir) / "manifest.json"
    with atomic_open(path) as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


# --- interactions -----------------------------------------------------------

def write_interactions(path: Path, records: Iterable[InteractionRecord]) -> None:
    """One row per turn; turns are numbered from 1."""
    with atomic_open(path) as fh:
        fh.write(",".join(INTERACTION_COLUMNS) + "\n")
        for rec in records:
            prefix = f"{_csv_field(rec.name_a)},{_csv_field(rec.name_b)},{rec.repetition},"
            codes = ("C", "D")
            fh.write("".join(
                f"{prefix}{t},{codes[a]},{codes[b]}\n"
                for t, (a, b) in enumerate(zip(rec.history.focal, rec.history.opponent), 1)
            ))


def _csv_field(text: str) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="").writerow([text])
    return buf.getvalue()


@dataclass(frozen=True)
class ObservedMatch:
    name_a: str
    name_b: str
    repetition: int
    history: MatchHistory


def read_interactions(path: Path) -> list[ObservedMatch]:
    """Parse an interaction CSV into matches in order of first appearance.

    Raises :class:`InputError` naming the offending line.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise InputError(f"{path}: empty file")
        if tuple(h.strip() for h in header) != INTERACTION_COLUMNS:
            raise InputError(f"{path}:1: expected header {','.join(INTERACTION_COLUMNS)}")
        groups: dict[tuple[str, str, int], dict[int, tuple[int, int]]] = {}
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(INTERACTION_COLUMNS):
                raise InputError(f"{path}:{line}: expected {len(INTERACTION_COLUMNS)} fields")
            a, b, rep, turn, act_a, act_b = (c.strip() for c in row)
            try:
                rep_i, turn_i = int(rep), int(turn)
                codes = (int(Action.parse(act_a)), int(Action.parse(act_b)))
            except ValueError as exc:
                raise InputError(f"{path}:{line}: {exc}") from None
            if turn_i < 1:
                raise InputError(f"{path}:{line}: turn numbers start at 1")
            turns = groups.setdefault((a, b, rep_i), {})
            if turn_i in turns:
                raise InputError(f"{path}:{line}: duplicate turn {turn_i}")
            turns[turn_i] = codes
    if not groups:
        raise InputError(f"{path}: no interactions")
    matches = []
    for (a, b, rep), turns in groups.items():
        n = len(turns)
        if max(turns) != n:
            raise InputError(f"{path}: match {a} vs {b} repetition {rep} has missing turns")
        pairs = [turns[t] for t in range(1, n + 1)]
        f, o = zip(*pairs)
        matches.append(ObservedMatch(a, b, rep, MatchHistory(f, o)))
    return matches


# --- detection ---------------------------------------------------------------

def detection_row(name_a, name_b, repetition, history: MatchHistory, payoffs: PayoffParams,
                  focal: str = "a", imputation="overall") -> list:
    """Measurement, fit and state statistics for one side of one match."""
    h = history if focal == "a" else history.transpose()
    if focal == "b":
        name_a, name_b = name_b, name_a
    prof = measure_memory_one(h, "a", imputation)
    fit = fit_zd(prof.p_hat, payoffs)
    dist = state_distribution(h)
    sa, sb = mean_scores(h, payoffs)
    winner = "a" if sa > sb else "b" if sb > sa else "tie"
    return [
        name_a, name_b, repetition, *prof.p_hat, *prof.visit_counts,
        fit.alpha, fit.beta, fit.chi, fit.sse, *dist, sa, sb, winner,
    ]


def detection_rows(matches, payoffs: PayoffParams, imputation="overall") -> Iterator[list]:
    """Two rows per match: each player in turn as the focal side."""
    for m in matches:
        for side in ("a", "b"):
            yield detection_row(m.name_a, m.name_b, m.repetition, m.history, payoffs, side, imputation)


# --- tables ------------------------------------------------------------------

def summary_rows(name: str, metric: str, s: DistributionSummary) -> list:
    return [name, metric, s.count, s.mean, s.median, s.variance, s.skewness, s.min, s.q1, s.q3, s.max]


def write_payoff_matrix(path: Path, M: PayoffMatrix) -> None:
    write_rows(path, ["", *M.names], ([n, *row] for n, row in zip(M.names, M.values)))


def read_payoff_matrix(path: Path) -> PayoffMatrix:
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    if len(rows) < 2:
        raise InputError(f"{path}: payoff matrix needs a header and at least one row")
    names = [c.strip() for c in rows[0][1:]]
    if len(rows) - 1 != len(names):
        raise InputError(f"{path}: expected {len(names)} rows, found {len(rows) - 1}")
    values = []
    for line, row in enumerate(rows[1:], 2):
        if len(row) != len(names) + 1 or row[0].strip() != names[line - 2]:
            raise InputError(f"{path}:{line}: row must start with {names[line - 2]!r} and have {len(names)} values")
        try:
            values.append([float(v) for v in row[1:]])
        except ValueError:
            raise InputError(f"{path}:{line}: non-numeric payoff") from None
    return PayoffMatrix(tuple(names), np.array(values))


def score_ranks(M: PayoffMatrix) -> dict[str, int]:
    """1-based rank by mean off-diagonal row score (ties by name)."""
    V = M.values.copy()
    np.fill_diagonal(V, np.nan)
    means = np.nanmean(V, axis=1) if len(M.names) > 1 else np.diag(M.values)
    order = sorted(range(len(M.names)), key=lambda i: (-means[i], M.names[i]))
    return {M.names[i]: r for r, i in enumerate(order, 1)}


def stationary_rows(M: PayoffMatrix, x: np.ndarray) -> list[list]:
    ranks = score_ranks(M)
    rows = [[n, ranks[n], float(v)] for n, v in zip(M.names, x)]
    return sorted(rows, key=lambda r: r[1])


def fixation_row(a: str, b: str, res: FixationResult) -> list:
    return [a, b, res.N, res.x1, res.standard_error, res.normalized]


def group_sse(rows: Iterable[Sequence]) -> dict[str, list[float]]:
    """SSE values per focal strategy from detection rows, excluding self-play."""
    out = defaultdict(list)
    i_sse = DETECTION_COLUMNS.index("sse")
    for r in rows:
        if r[0] != r[1]:
            out[r[0]].append(float(r[i_sse]))
    return out
