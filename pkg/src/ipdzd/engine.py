"""Match and round-robin tournament simulation.

Seeding
-------
Every match seed is derived from the tournament's master seed with
:func:`mix_seed`, a chain of SplitMix64 finalisers::

    h = splitmix64(master)
    for part in parts:            # (pair_index, repetition)
        h = splitmix64(h ^ splitmix64(part))

Within a match each player draws from its own PCG64 stream seeded by
``mix_seed(match_seed, strategy_digest, occurrence)``, where
``strategy_digest`` is a SHA-256 digest of the strategy's canonical key and
``occurrence`` is 1 only for the second of two identical strategies. A
player's stream therefore depends on the match seed and its own strategy,
not on the opponent or on seat order.
"""
from __future__ import annotations

import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .game import MatchHistory, PayoffParams, score_history
from .strategies import StrategySpec

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def mix_seed(master: int, *parts: int) -> int:
    h = splitmix64(master & MASK64)
    for part in parts:
        h = splitmix64(h ^ splitmix64(part & MASK64))
    return h


def strategy_digest(spec: StrategySpec) -> int:
    return int.from_bytes(hashlib.sha256(spec.key.encode()).digest()[:8], "little")


def _uniforms(spec: StrategySpec, seed: int, occurrence: int, turns: int) -> list[float]:
    if not spec.stochastic:
        return [0.0] * turns
    rng = np.random.default_rng(mix_seed(seed, strategy_digest(spec), occurrence))
    return rng.random(turns).tolist()


def play_match(a: StrategySpec, b: StrategySpec, turns: int, seed: int) -> MatchHistory:
    """Play ``turns`` rounds of ``a`` (focal) against ``b``."""
    if turns < 1:
        raise ValueError("turns must be >= 1")
    ua = _uniforms(a, seed, 0, turns)
    ub = _uniforms(b, seed, 1 if a.key == b.key else 0, turns)
    decide_a, decide_b = a.make_player(), b.make_player()
    fa = bytearray(turns)
    fb = bytearray(turns)
    last_a = last_b = None
    for t in range(turns):
        x = decide_a(last_a, last_b, ua[t])
        y = decide_b(last_b, last_a, ub[t])
        fa[t] = x
        fb[t] = y
        last_a, last_b = x, y
    return MatchHistory(np.frombuffer(fa, np.uint8), np.frombuffer(fb, np.uint8))


@dataclass(frozen=True)
class TournamentConfig:
    corpus: Sequence[StrategySpec]
    turns: int = 2000
    repetitions: int = 60
    master_seed: int = 0
    payoffs: PayoffParams = field(default_factory=PayoffParams)
    include_self_interactions: bool = False

    def __post_init__(self):
        if self.turns < 1 or self.repetitions < 1:
            raise ValueError("turns and repetitions must be positive")

    def pairs(self) -> list[tuple[int, int]]:
        """Canonical pair order; ``pair_index`` is the position in this list."""
        n = len(self.corpus)
        start = 0 if self.include_self_interactions else 1
        return [(i, j) for i in range(n) for j in range(i + start, n)]


@dataclass(frozen=True)
class InteractionRecord:
    pair_index: int
    index_a: int
    index_b: int
    name_a: str
    name_b: str
    repetition: int
    history: MatchHistory
    score_a: float
    score_b: float

    @property
    def turns(self) -> int:
        return len(self.history)

    @property
    def winner(self) -> str:
        if self.score_a > self.score_b:
            return "a"
        if self.score_b > self.score_a:
            return "b"
        return "tie"


def _play_pair(task):
    a, b, turns, seeds = task
    return [play_match(a, b, turns, s) for s in seeds]


def run_tournament(cfg: TournamentConfig, workers: int = 1) -> Iterator[InteractionRecord]:
    """Yield one record per (pair, repetition) in canonical order.

    ``workers > 1`` farms pairs out to a process pool; output order and
    content do not depend on the worker count.
    """
    corpus = list(cfg.corpus)
    if len(corpus) < 2:
        raise ValueError("a tournament needs at least 2 strategies")
    names = [s.name for s in corpus]
    if len(set(names)) != len(names):
        raise ValueError("strategy names in a corpus must be unique")
    pairs = cfg.pairs()
    tasks = [
        (
            corpus[i],
            corpus[j],
            cfg.turns,
            [mix_seed(cfg.master_seed, k, r) for r in range(cfg.repetitions)],
        )
        for k, (i, j) in enumerate(pairs)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = pool.map(_play_pair, tasks, chunksize=max(1, len(tasks) // (4 * workers)))
            yield from _records(cfg, pairs, names, results)
    else:
        yield from _records(cfg, pairs, names, map(_play_pair, tasks))


def _records(cfg, pairs, names, results):
    for k, ((i, j), histories) in enumerate(zip(pairs, results)):
        for r, h in enumerate(histories):
            sa, sb = score_history(h, cfg.payoffs)
            yield InteractionRecord(k, i, j, names[i], names[j], r, h, sa, sb)
