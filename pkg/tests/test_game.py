import numpy as np
import pytest

from ipdzd.game import (
    Action,
    MatchHistory,
    MemoryOneVector,
    PayoffParams,
    mean_scores,
    score_history,
    state_distribution,
)


def test_action_parse():
    assert Action.parse("c") is Action.C
    assert Action.parse(" D ") is Action.D
    assert Action.parse(1) is Action.D
    assert str(Action.C) == "C"
    with pytest.raises(ValueError):
        Action.parse("X")
    with pytest.raises(ValueError):
        Action.parse(2)


def test_payoff_validation():
    assert PayoffParams().as_tuple() == (3, 0, 5, 1)
    assert PayoffParams.parse("4,0,6,2").R == 4
    with pytest.raises(ValueError):
        PayoffParams(5, 0, 3, 1)  # T > R violated
    with pytest.raises(ValueError):
        PayoffParams(3, 0, 4, 2)  # 2P == S + T
    with pytest.raises(ValueError):
        PayoffParams.parse("3,0,5")


def test_scores_single_turns():
    g = PayoffParams()
    for text, expected in [("CC", (3, 3)), ("CD", (0, 5)), ("DC", (5, 0)), ("DD", (1, 1))]:
        assert score_history(MatchHistory.from_string(text), g) == expected


def test_scores_and_states():
    h = MatchHistory.from_string("CC CD DC DD DD")
    g = PayoffParams()
    assert score_history(h, g) == (3 + 0 + 5 + 1 + 1, 3 + 5 + 0 + 1 + 1)
    assert mean_scores(h, g) == pytest.approx((2.0, 2.0))
    np.testing.assert_allclose(state_distribution(h), [0.2, 0.2, 0.2, 0.4])


def test_empty_history_rejected():
    h = MatchHistory.from_turns([])
    assert len(h) == 0
    with pytest.raises(ValueError, match="empty"):
        score_history(h, PayoffParams())
    with pytest.raises(ValueError):
        state_distribution(h)


def test_history_immutable_and_transpose():
    h = MatchHistory.from_string("CD DD")
    with pytest.raises(AttributeError):
        h.focal = np.zeros(2)
    with pytest.raises(ValueError):
        h.focal[0] = 1
    t = h.transpose()
    assert t == MatchHistory.from_string("DC DD")
    assert t.transpose() == h
    assert hash(t.transpose()) == hash(h)
    assert list(h.state_codes()) == [1, 3]


def test_history_rejects_bad_input():
    with pytest.raises(ValueError):
        MatchHistory([0, 1], [0])
    with pytest.raises(ValueError):
        MatchHistory([0, 2], [0, 0])


def test_memory_one_vector():
    v = MemoryOneVector(1, 0.5, 0.25, 0)
    assert tuple(v) == (1, 0.5, 0.25, 0)
    assert v[1] == 0.5 and len(v) == 4
    assert MemoryOneVector.coerce([1, 0.5, 0.25, 0]) == v
    with pytest.raises(ValueError):
        MemoryOneVector(1.1, 0, 0, 0)


def test_history_pickles():
    import pickle

    h = MatchHistory.from_string("CD DC DD")
    assert pickle.loads(pickle.dumps(h)) == h
