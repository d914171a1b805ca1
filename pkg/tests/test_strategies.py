import pytest

from ipdzd.engine import play_match
from ipdzd.game import MatchHistory
from ipdzd.strategies import (
    CATALOG_VERSION,
    Classic,
    LookupTable,
    MemoryOne,
    default_catalog,
    resolve,
    split_names,
)


def moves(spec, opp, turns=8, seed=0):
    h = play_match(spec, opp, turns, seed)
    return "".join("CD"[a] for a in h.focal)


def test_catalog_names_unique_and_resolvable():
    cat = default_catalog()
    names = [s.name for s in cat]
    assert len(cat) == 20
    assert len(set(names)) == len(names)
    for n in names:
        assert resolve(n).name == n
    assert CATALOG_VERSION


def test_classic_behaviour():
    alt = Classic("Alternator")
    assert moves(alt, Classic("Cooperator")) == "CDCDCDCD"
    assert moves(Classic("TitForTat"), alt) == "CCDCDCDC"
    assert moves(Classic("Grudger"), MemoryOne((1, 1, 1, 1), 0.0), 4) == "CDDD"
    # win-stay lose-shift against a defector alternates C and D
    assert moves(Classic("WinStayLoseShift"), Classic("Defector"), 4) == "CDCD"


def test_memory_one_deterministic_equals_tft():
    tft = MemoryOne((1, 0, 1, 0))
    opp = Classic("Random", 0.5)
    a = play_match(tft, opp, 50, 3)
    b = play_match(Classic("TitForTat"), opp, 50, 3)
    assert a == b
    assert not tft.stochastic


def test_lookup_tables():
    cat = {s.name: s for s in default_catalog()}
    alt = Classic("Alternator")
    assert moves(cat["TitForTwoTats"], Classic("Defector"), 5) == "CCDDD"
    assert moves(cat["TitForTwoTats"], alt, 6) == "CCCCCC"
    assert moves(cat["TwoTitsForTat"], alt, 6) == "CCDDDD"
    assert moves(cat["CyclerCCD"], Classic("Cooperator"), 9) == "CCDCCDCCD"
    tbl = LookupTable.from_mapping(1, {"CC": "C", "CD": "D", "DC": "C", "DD": "D"}, "C")
    assert play_match(tbl, alt, 10, 0) == play_match(Classic("TitForTat"), alt, 10, 0)


def test_lookup_validation():
    with pytest.raises(ValueError):
        LookupTable(1, ("C",) * 3, ("C",))
    with pytest.raises(ValueError):
        LookupTable(2, ("C",) * 16, ("C",))
    with pytest.raises(ValueError, match="missing"):
        LookupTable.from_mapping(1, {"CC": "C"}, "C")


def test_resolve_parametrised_names():
    r = resolve("Random(0.3)")
    assert isinstance(r, Classic) and r.p == 0.3 and r.name == "Random(0.3)"
    m = resolve("MemoryOne(1,0,1,0,0)")
    assert tuple(m.p) == (1, 0, 1, 0) and m.initial_cooperation_probability == 0
    with pytest.raises(ValueError, match="unknown"):
        resolve("NoSuchStrategy")
    with pytest.raises(ValueError):
        resolve("MemoryOne(1,2,3)")


def test_split_names_respects_parentheses():
    assert split_names("A, MemoryOne(1,0,1,0),Random(0.2) ,") == [
        "A",
        "MemoryOne(1,0,1,0)",
        "Random(0.2)",
    ]


def test_stochastic_flags():
    assert Classic("Random").stochastic
    assert not Classic("Random", 1.0).stochastic
    assert MemoryOne((8 / 9, 0.5, 1 / 3, 0)).stochastic
    assert not MemoryOne((1, 0, 1, 0), 0.0).stochastic


def test_suspicious_tft_opens_with_defection():
    stft = resolve("SuspiciousTitForTat")
    h = play_match(stft, Classic("Cooperator"), 3, 0)
    assert h == MatchHistory.from_string("DC CC CC")
