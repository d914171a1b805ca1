"""Strategy specifications and the default catalog.

A strategy spec is a small frozen value describing behaviour. Calling
``spec.make_player()`` returns a fresh stateful decision function

    decide(last_own, last_opp, u) -> 0 (C) or 1 (D)

where ``last_own``/``last_opp`` are the previous turn's action codes (``None``
on the first turn) and ``u`` is this player's uniform draw for the turn.
Every player receives a draw each turn whether it uses it or not, so a
player's random stream never depends on what its opponent does.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence, Union

from .game import Action, MemoryOneVector

C, D = 0, 1
Decide = Callable[[Union[int, None], Union[int, None], float], int]


@dataclass(frozen=True)
class MemoryOne:
    p: MemoryOneVector
    initial_cooperation_probability: float = 1.0
    label: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "p", MemoryOneVector.coerce(self.p))
        if not 0.0 <= self.initial_cooperation_probability <= 1.0:
            raise ValueError("initial cooperation probability must lie in [0, 1]")

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        body = ",".join(f"{v:g}" for v in self.p)
        if self.initial_cooperation_probability != 1.0:
            body += f",{self.initial_cooperation_probability:g}"
        return f"MemoryOne({body})"

    @property
    def key(self) -> str:
        vals = ",".join(repr(float(v)) for v in self.p)
        return f"MemoryOne[{vals};{self.initial_cooperation_probability!r}]"

    @property
    def stochastic(self) -> bool:
        probs = (*self.p, self.initial_cooperation_probability)
        return any(0.0 < v < 1.0 for v in probs)

    uses_match_length = False

    def make_player(self) -> Decide:
        coop = tuple(self.p)
        init = self.initial_cooperation_probability

        def decide(last_own, last_opp, u):
            if last_own is None:
                return C if u < init else D
            return C if u < coop[2 * last_own + last_opp] else D

        return decide


@dataclass(frozen=True)
class LookupTable:
    """Deterministic play keyed on the last ``depth`` joint actions.

    ``table[code]`` is the move for the window whose joint states (own action
    first, oldest most significant) read ``code`` in base 4.
    """

    depth: int
    table: tuple[Action, ...]
    opening: tuple[Action, ...]
    label: str | None = None

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("lookup depth must be >= 1")
        table = tuple(Action.parse(a) for a in self.table)
        opening = tuple(Action.parse(a) for a in self.opening)
        if len(table) != 4**self.depth:
            raise ValueError(f"lookup table of depth {self.depth} needs {4**self.depth} entries")
        if len(opening) != self.depth:
            raise ValueError("opening must contain exactly `depth` moves")
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "opening", opening)

    @classmethod
    def from_rule(cls, depth: int, rule, opening: Sequence, label: str | None = None):
        """Build a table from ``rule(window) -> Action``.

        ``window`` is a tuple of ``(own, opp)`` Action pairs, oldest first.
        """
        pairs = [(Action(a), Action(b)) for a in (0, 1) for b in (0, 1)]
        table = [Action.parse(rule(w)) for w in itertools.product(pairs, repeat=depth)]
        return cls(depth, tuple(table), tuple(opening), label)

    @classmethod
    def from_mapping(cls, depth: int, mapping: Mapping[str, str], opening: str, label=None):
        """Build from ``{"CC,CD": "D", ...}`` style keys (oldest state first)."""
        def rule(window):
            key = ",".join(f"{a}{b}" for a, b in window)
            return mapping[key]

        try:
            return cls.from_rule(depth, rule, tuple(opening), label)
        except KeyError as exc:
            raise ValueError(f"lookup table missing window {exc.args[0]}") from None

    @property
    def name(self) -> str:
        return self.label or f"LookupTable({self.depth})"

    @property
    def key(self) -> str:
        table = "".join(str(a) for a in self.table)
        opening = "".join(str(a) for a in self.opening)
        return f"LookupTable[{self.depth};{opening};{table}]"

    stochastic = False
    uses_match_length = False

    def make_player(self) -> Decide:
        table = tuple(int(a) for a in self.table)
        opening = tuple(int(a) for a in self.opening)
        depth = self.depth
        modulus = 4**depth
        state = {"t": 0, "code": 0}

        def decide(last_own, last_opp, u):
            t = state["t"]
            if t > 0:
                state["code"] = (state["code"] * 4 + 2 * last_own + last_opp) % modulus
            state["t"] = t + 1
            if t < depth:
                return opening[t]
            return table[state["code"]]

        return decide


CLASSIC_KINDS = (
    "Cooperator",
    "Defector",
    "TitForTat",
    "Alternator",
    "Grudger",
    "WinStayLoseShift",
    "Random",
)


@dataclass(frozen=True)
class Classic:
    """One of the well-known named strategies; ``p`` only applies to Random."""

    kind: str
    p: float = 0.5
    label: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in CLASSIC_KINDS:
            raise ValueError(f"unknown classic strategy {self.kind!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("Random(p) needs p in [0, 1]")

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        if self.kind == "Random":
            return "Random" if self.p == 0.5 else f"Random({self.p:g})"
        return self.kind

    @property
    def key(self) -> str:
        if self.kind == "Random":
            return f"Random[{self.p!r}]"
        return self.kind

    @property
    def stochastic(self) -> bool:
        return self.kind == "Random" and 0.0 < self.p < 1.0

    uses_match_length = False

    def make_player(self) -> Decide:
        kind = self.kind
        if kind == "Cooperator":
            return lambda own, opp, u: C
        if kind == "Defector":
            return lambda own, opp, u: D
        if kind == "TitForTat":
            return lambda own, opp, u: C if opp is None else opp
        if kind == "Alternator":
            return lambda own, opp, u: C if own is None else 1 - own
        if kind == "WinStayLoseShift":
            # stay after R or T, shift after S or P
            return lambda own, opp, u: C if own is None else (own if opp == C else 1 - own)
        if kind == "Random":
            p = self.p
            return lambda own, opp, u: C if u < p else D
        grudge = [False]

        def grudger(own, opp, u):
            if opp == D:
                grudge[0] = True
            return D if grudge[0] else C

        return grudger


StrategySpec = Union[MemoryOne, LookupTable, Classic]


def _tf2t(window):
    return "D" if all(opp == Action.D for _, opp in window) else "C"


def _two_tits(window):
    return "D" if any(opp == Action.D for _, opp in window) else "C"


def _cycle_ccd(window):
    own = tuple(a for a, _ in window)
    return "D" if own == (Action.C, Action.C) else "C"


def default_catalog() -> list[StrategySpec]:
    """The desk-scale corpus: every strategy named in the study plus common peers."""
    return [
        Classic("Cooperator"),
        Classic("Defector"),
        Classic("TitForTat"),
        MemoryOne((1, 0, 1, 0), 0.0, "SuspiciousTitForTat"),
        Classic("Alternator"),
        Classic("Grudger"),
        Classic("WinStayLoseShift"),
        Classic("Random"),
        MemoryOne((8 / 9, 1 / 2, 1 / 3, 0), 1.0, "Extort-2"),
        MemoryOne((7 / 8, 7 / 16, 3 / 8, 0), 1.0, "Extort-2v2"),
        MemoryOne((11 / 17, 0, 8 / 17, 0), 1.0, "Extort-4"),
        MemoryOne((1, 1 / 8, 1, 1 / 4), 1.0, "ZDGTFT-2"),
        MemoryOne((1, 1 / 3, 1, 1 / 3), 1.0, "GTFT"),
        MemoryOne((0.9, 0, 0.9, 0), 1.0, "Joss"),
        MemoryOne((1, 0, 1, 2 / 3), 1.0, "FirmButFair"),
        MemoryOne((0.9, 0.1, 0.1, 0.9), 1.0, "StochasticWSLS"),
        LookupTable.from_rule(2, _tf2t, "CC", "TitForTwoTats"),
        LookupTable.from_rule(2, _two_tits, "CC", "TwoTitsForTat"),
        LookupTable.from_rule(3, _two_tits, "CCC", "HardTitForTat"),
        LookupTable.from_rule(2, _cycle_ccd, "CC", "CyclerCCD"),
    ]


CATALOG_VERSION = "1"

_CALL = re.compile(r"^\s*(\w[\w-]*)\s*\(([^)]*)\)\s*$")


def resolve(name: str, catalog: Sequence[StrategySpec] | None = None) -> StrategySpec:
    """Look a strategy up by catalog name, or parse ``Random(p)`` /
    ``MemoryOne(p1,p2,p3,p4[,init])``."""
    catalog = default_catalog() if catalog is None else catalog
    for spec in catalog:
        if spec.name == name:
            return spec
    m = _CALL.match(name)
    if m:
        head, args = m.group(1), m.group(2)
        try:
            vals = [float(v) for v in args.split(",") if v.strip()]
        except ValueError:
            raise ValueError(f"bad arguments in strategy {name!r}") from None
        if head == "Random" and len(vals) == 1:
            return Classic("Random", vals[0])
        if head == "MemoryOne" and len(vals) in (4, 5):
            init = vals[4] if len(vals) == 5 else 1.0
            return MemoryOne(tuple(vals[:4]), init)
    raise ValueError(f"unknown strategy {name!r}")


def split_names(text: str) -> list[str]:
    """Split a comma-separated corpus list, keeping commas inside parentheses."""
    names, depth, cur = [], 0, []
    for ch in text:
        if ch == "," and depth == 0:
            names.append("".join(cur).strip())
            cur = []
            continue
        depth += (ch == "(") - (ch == ")")
        cur.append(ch)
    names.append("".join(cur).strip())
    return [n for n in names if n]
