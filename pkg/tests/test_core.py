import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hiddengame.core import (DENSE_LIMIT, GameMatrix, HiddenGame, MixedStrategy, game_from_dict,
                             game_to_dict, gain_vector, hash_uniform, load_game, log2_ceil,
                             make_hidden_game, make_uniform_game, payoff)


def test_payoff_hidden_member_with_zero_noise():
    g = HiddenGame(n=4, hidden=(2,), rho=0.5, a1=np.zeros((4, 4)))
    assert all(payoff(g, 2, j) == 1.0 for j in range(4))


def test_payoff_outside_member_with_unit_noise():
    g = HiddenGame(n=4, hidden=(2,), rho=0.5, a1=np.ones((4, 4)))
    assert all(payoff(g, 0, j) == 0.5 for j in range(4))


def test_payoff_formula_single_entry():
    a1 = np.zeros((4, 4))
    a1[2, 3] = 0.4
    g = HiddenGame(n=4, hidden=(2,), rho=0.5, a1=a1)
    assert payoff(g, 2, 3) == pytest.approx(1.0 + 0.5 * 0.4, abs=1e-15)


def test_gain_vector_pure_is_column():
    g = make_hidden_game(16, 3, 0.5, seed=1)
    for j in (0, 7, 15):
        np.testing.assert_array_equal(gain_vector(g, MixedStrategy.pure(j)), g.matrix()[:, j])


def test_gain_vector_row_average():
    g = GameMatrix(np.array([[0.0, 2.0], [1.0, 1.0]]), lo=0.0, hi=2.0)
    np.testing.assert_allclose(gain_vector(g, MixedStrategy.uniform(2)), [1.0, 1.0])


def test_gain_vector_matches_double_loop():
    rng = np.random.default_rng(0)
    a = rng.random((8, 8))
    g = GameMatrix(a)
    y = MixedStrategy.from_dense(rng.dirichlet(np.ones(8)))
    ref = [sum(a[i, j] * y.prob(j) for j in range(8)) for i in range(8)]
    np.testing.assert_allclose(gain_vector(g, y), ref, atol=1e-14)


def test_make_hidden_game_deterministic():
    a, b = make_hidden_game(4, 1, 0.5, seed=7), make_hidden_game(4, 1, 0.5, seed=7)
    assert a.hidden == b.hidden
    np.testing.assert_array_equal(a.matrix(), b.matrix())


def test_make_hidden_game_cardinality_and_gap():
    g = make_hidden_game(64, 4, 0.5, seed=3)
    assert g.r == 4 and len(set(g.hidden)) == 4
    a = g.matrix()
    inside = np.zeros(64, dtype=bool)
    inside[list(g.hidden)] = True
    assert a[inside].min() >= 1.0
    assert a[~inside].max() <= 0.5


@pytest.mark.parametrize("bad", [dict(r=0), dict(r=8), dict(rho=0.0), dict(rho=1.0)])
def test_make_hidden_game_rejects(bad):
    kw = dict(n=8, r=2, rho=0.5, seed=0) | bad
    with pytest.raises(ValueError):
        make_hidden_game(**kw)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 32), r=st.integers(1, 7), rho=st.floats(0.01, 0.99),
       w=st.lists(st.floats(0.0, 1.0), min_size=8, max_size=8).filter(lambda v: sum(v) > 0))
def test_dominance_gap_for_any_opponent(seed, r, rho, w):
    g = make_hidden_game(8, r, rho, seed)
    gains = g.gain_vector(MixedStrategy.from_dense(np.array(w)))
    inside = g.hidden_mask
    assert gains[inside].min() >= 1.0
    assert gains[~inside].max() <= rho + 1e-12


def test_on_demand_rows_match_dense():
    # same hash keys either way, so values agree exactly
    n = 40
    dense = HiddenGame(n=n, hidden=(1, 5), rho=0.3, seed=9)
    idx = np.arange(n)
    a1 = hash_uniform(9, 1, idx[:, None], idx[None, :])
    np.testing.assert_array_equal(dense.matrix(), dense.hidden_mask[:, None] + 0.3 * a1)
    for i in (0, 5, 39):
        np.testing.assert_array_equal(hash_uniform(9, 1, i, idx), a1[i])
        np.testing.assert_array_equal(hash_uniform(9, 1, idx, i), a1[:, i])


def test_large_game_is_lazy_and_consistent():
    n = DENSE_LIMIT + 1
    g = make_hidden_game(n, 3, 0.5, seed=2)
    assert g.dense_matrix is None
    row, col = g.row(10), g.column(20)
    assert row[20] == col[10] == g.payoff(10, 20)
    y = MixedStrategy(np.array([3, 20]), np.array([0.25, 0.75]))
    np.testing.assert_allclose(g.gain_vector(y), 0.25 * g.column(3) + 0.75 * g.column(20))


def test_hash_uniform_range_and_independence():
    u = hash_uniform(1, 1, np.arange(100_000))
    assert u.min() >= 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 0.01
    v = hash_uniform(1, 2, np.arange(100_000))
    assert abs(np.corrcoef(u, v)[0, 1]) < 0.02


def test_mixed_strategy_validation():
    with pytest.raises(ValueError):
        MixedStrategy(np.array([1, 0]), np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        MixedStrategy(np.array([0, 1]), np.array([0.5, 0.6]))
    with pytest.raises(ValueError):
        MixedStrategy(np.array([0]), np.array([-1.0]))
    with pytest.raises(ValueError):
        MixedStrategy.from_dense(np.zeros(3))


def test_from_dense_with_labels_sorts_and_drops_zeros():
    x = MixedStrategy.from_dense(np.array([0.5, 0.0, 0.5]), actions=[9, 4, 2])
    np.testing.assert_array_equal(x.support, [2, 9])
    assert x.prob(9) == 0.5 and x.prob(4) == 0.0
    np.testing.assert_allclose(x.dense(10)[[2, 9]], [0.5, 0.5])


@pytest.mark.parametrize("game", [make_hidden_game(12, 3, 0.25, seed=4), make_uniform_game(12, 4),
                                  GameMatrix(np.eye(3))])
def test_game_round_trip(game, tmp_path):
    doc = game_to_dict(game)
    back = game_from_dict(json.loads(json.dumps(doc)))
    np.testing.assert_array_equal(back.matrix(), game.matrix())
    path = tmp_path / "g.json"
    path.write_text(json.dumps(doc))
    np.testing.assert_array_equal(load_game(path).matrix(), game.matrix())
    np.testing.assert_array_equal(load_game(json.dumps(doc)).matrix(), game.matrix())


def test_game_from_dict_errors():
    with pytest.raises(ValueError):
        game_from_dict({"n": 4})
    with pytest.raises(ValueError):
        game_from_dict({"n": 2, "entries": [[0, 1]]})
    with pytest.raises(ValueError):
        game_from_dict({"n": 4, "r": 2, "rho": 0.5, "seed": 0, "hidden": [1]})


@pytest.mark.parametrize("x,expected", [(1, 0), (2, 1), (3, 2), (4, 2), (5, 3), (2 ** 14, 14), (2 ** 14 + 1, 15)])
def test_log2_ceil(x, expected):
    assert log2_ceil(x) == expected
