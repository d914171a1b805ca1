"""Core IPD types: actions, payoffs and match histories.

Actions are encoded as small integers (C=0, D=1) so a joint state can be
written ``2 * focal + opponent``, giving the fixed order CC, CD, DC, DD.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Iterator, Sequence

import numpy as np

STATES = ("CC", "CD", "DC", "DD")


class Action(IntEnum):
    C = 0
    D = 1

    def __str__(self) -> str:
        return self.name

    @classmethod
    def parse(cls, value) -> "Action":
        if isinstance(value, Action):
            return value
        if isinstance(value, str):
            try:
                return cls[value.strip().upper()]
            except KeyError:
                raise ValueError(f"invalid action {value!r}") from None
        if value in (0, 1):
            return cls(int(value))
        raise ValueError(f"invalid action {value!r}")


@dataclass(frozen=True)
class PayoffParams:
    """Prisoner's Dilemma payoffs (R, S, T, P) for the row player."""

    R: float = 3.0
    S: float = 0.0
    T: float = 5.0
    P: float = 1.0

    def __post_init__(self):
        if not (self.T > self.R > self.P > self.S):
            raise ValueError(f"payoffs must satisfy T > R > P > S, got {self.as_tuple()}")
        if 2 * self.P == self.S + self.T:
            raise ValueError("payoffs must satisfy 2P != S + T")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.R, self.S, self.T, self.P)

    @classmethod
    def parse(cls, text: str) -> "PayoffParams":
        parts = [float(v) for v in text.split(",")]
        if len(parts) != 4:
            raise ValueError(f"expected R,S,T,P but got {text!r}")
        return cls(*parts)

    def focal_table(self) -> np.ndarray:
        """Payoff to the focal player indexed by joint state code."""
        return np.array([self.R, self.S, self.T, self.P], dtype=float)

    def opponent_table(self) -> np.ndarray:
        return np.array([self.R, self.T, self.S, self.P], dtype=float)


def _as_codes(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.uint8)
    if arr.ndim != 1 or (arr.size and arr.max() > 1):
        raise ValueError("actions must be a 1-d sequence of 0/1 codes")
    return arr


class MatchHistory:
    """Immutable record of the joint actions of one match.

    ``focal`` and ``opponent`` are read-only ``uint8`` arrays of action codes.
    """

    __slots__ = ("focal", "opponent")

    def __init__(self, focal, opponent):
        f = _as_codes(focal).copy()
        o = _as_codes(opponent).copy()
        if f.shape != o.shape:
            raise ValueError("both players must have the same number of turns")
        f.setflags(write=False)
        o.setflags(write=False)
        object.__setattr__(self, "focal", f)
        object.__setattr__(self, "opponent", o)

    def __setattr__(self, name, value):
        raise AttributeError("MatchHistory is immutable")

    def __reduce__(self):
        return (MatchHistory, (self.focal, self.opponent))

    @classmethod
    def from_turns(cls, turns: Iterable[Sequence]) -> "MatchHistory":
        pairs = [(int(Action.parse(a)), int(Action.parse(b))) for a, b in turns]
        if not pairs:
            return cls(np.empty(0, np.uint8), np.empty(0, np.uint8))
        f, o = zip(*pairs)
        return cls(f, o)

    @classmethod
    def from_string(cls, text: str) -> "MatchHistory":
        """Parse ``"CC CD DC"`` style shorthand."""
        return cls.from_turns((tok[0], tok[1]) for tok in text.split())

    @property
    def turns(self) -> list[tuple[Action, Action]]:
        return [(Action(a), Action(b)) for a, b in zip(self.focal, self.opponent)]

    def transpose(self) -> "MatchHistory":
        return MatchHistory(self.opponent, self.focal)

    def state_codes(self) -> np.ndarray:
        return 2 * self.focal.astype(np.int64) + self.opponent

    def __len__(self) -> int:
        return int(self.focal.size)

    def __iter__(self) -> Iterator[tuple[Action, Action]]:
        return iter(self.turns)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MatchHistory):
            return NotImplemented
        return np.array_equal(self.focal, other.focal) and np.array_equal(
            self.opponent, other.opponent
        )

    def __hash__(self) -> int:
        return hash((self.focal.tobytes(), self.opponent.tobytes()))

    def __repr__(self) -> str:
        body = " ".join(f"{a}{b}" for a, b in self.turns[:10])
        more = " ..." if len(self) > 10 else ""
        return f"MatchHistory({len(self)} turns: {body}{more})"


def score_history(history: MatchHistory, payoffs: PayoffParams) -> tuple[float, float]:
    """Total scores (focal, opponent) over the match."""
    if len(history) == 0:
        raise ValueError("empty history")
    counts = np.bincount(history.state_codes(), minlength=4)
    return (
        float(counts @ payoffs.focal_table()),
        float(counts @ payoffs.opponent_table()),
    )


def mean_scores(history: MatchHistory, payoffs: PayoffParams) -> tuple[float, float]:
    """Per-turn scores (focal, opponent)."""
    a, b = score_history(history, payoffs)
    n = len(history)
    return a / n, b / n


def state_distribution(history: MatchHistory) -> np.ndarray:
    """Empirical frequencies of CC, CD, DC, DD over all turns."""
    if len(history) == 0:
        raise ValueError("empty history")
    counts = np.bincount(history.state_codes(), minlength=4)
    return counts / counts.sum()


@dataclass(frozen=True)
class MemoryOneVector:
    """Cooperation probabilities after CC, CD, DC, DD (own action first)."""

    p1: float
    p2: float
    p3: float
    p4: float

    def __post_init__(self):
        for name, value in zip(("p1", "p2", "p3", "p4"), self):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} is not a probability")

    def __iter__(self):
        return iter((self.p1, self.p2, self.p3, self.p4))

    def __getitem__(self, i):
        return (self.p1, self.p2, self.p3, self.p4)[i]

    def __len__(self):
        return 4

    def as_array(self) -> np.ndarray:
        return np.array(tuple(self), dtype=float)

    @classmethod
    def coerce(cls, value) -> "MemoryOneVector":
        if isinstance(value, cls):
            return value
        vals = [float(v) for v in value]
        if len(vals) != 4:
            raise ValueError("a memory-one vector has four components")
        return cls(*vals)
