import math

import numpy as np
import pytest

from hiddengame.combined import CombinedLearner, build_p, build_q_tilde, combine, combined_round
from hiddengame.core import HiddenGame, MixedStrategy, make_hidden_game, make_uniform_game
from hiddengame.harness.adversaries import AdaptiveBestResponse
from hiddengame.oracles import OpponentHistory, pure_oracle
from hiddengame.swap import stationary


def test_build_p_rows():
    np.testing.assert_array_equal(build_p(1, 3), np.tile([0.0, 1.0, 0.0], (3, 1)))


def test_build_p_fixed_point_and_payoff():
    p = build_p(2, 4)
    np.testing.assert_allclose(stationary(p, 1e-12), np.eye(4)[2], atol=1e-12)
    rng = np.random.default_rng(0)
    x, g = rng.dirichlet(np.ones(4)), rng.random(4)
    assert x @ p @ g == pytest.approx(g[2], abs=1e-15)


def test_q_tilde_inside_is_unchanged():
    q = np.full((3, 3), 1 / 3)
    assert build_q_tilde(q, False) is q


def test_q_tilde_single_copy_plus_self_loop():
    np.testing.assert_array_equal(build_q_tilde(np.ones((1, 1)), True), np.eye(2))


def test_q_tilde_matches_row_stacking():
    rows = [np.array([0.2, 0.3, 0.5]), np.array([0.0, 1.0, 0.0]), np.array([0.6, 0.2, 0.2])]
    qt = build_q_tilde(np.array(rows), True)
    ref = np.zeros((4, 4))
    for s, row in enumerate(rows):
        ref[s, :3] = row
    ref[3, 3] = 1.0
    np.testing.assert_array_equal(qt, ref)
    np.testing.assert_allclose(qt.sum(axis=1), 1.0)


def test_combine_extremes_and_average():
    p, q = build_p(0, 2), np.array([[0.5, 0.5], [0.0, 1.0]])
    np.testing.assert_array_equal(combine(np.array([1.0, 0.0]), p, q), p)
    np.testing.assert_array_equal(combine(np.array([0.0, 1.0]), p, q), q)
    np.testing.assert_allclose(combine(np.array([0.5, 0.5]), p, q), (p + q) / 2)
    with pytest.raises(ValueError):
        combine(np.array([0.5, 0.5]), build_p(0, 3), q)


def test_first_round_single_action():
    learner = CombinedLearner(8, 100, seed=0)
    learner.fpl.noise = np.eye(8)[0]
    x, _ = combined_round(learner, np.zeros(8))
    assert learner.leader == 0
    np.testing.assert_allclose(learner.beta, [0.5, 0.5])
    assert x == MixedStrategy.pure(0)


@pytest.mark.parametrize("beta1", [1e-3, 0.3, 0.9])
def test_outside_leader_absorbs_all_mass(beta1):
    # the leader's self-loop row plus P pulls every state into it
    rng = np.random.default_rng(2)
    q = rng.dirichlet(np.ones(3), size=3)
    m = combine(np.array([beta1, 1 - beta1]), build_p(3, 4), build_q_tilde(q, True))
    np.testing.assert_allclose(stationary(m, 1e-12), np.eye(4)[3], atol=1e-11)


def _round_invariants(learner, x, gains):
    t = learner.t
    k = len(learner.support)
    reduced = np.append(gains[learner.tracker.index], gains[learner.leader])[:learner._m.shape[0]]
    xr = learner._x
    # residual contract and payoff transfer
    assert learner.residual <= 1 / math.sqrt(t)
    assert abs(xr @ learner._m @ reduced - xr @ reduced) <= learner.residual * reduced.max() + 1e-12
    # play stays on the support plus the leader
    assert set(x.support.tolist()) <= set(learner.support.actions) | {learner.leader}
    # meta gains: rank-one identity and the copy identity chain
    v1, v2 = learner.meta_gains
    assert v1 == gains[learner.leader]
    chain = sum(xr[s] * (gains[learner.tracker.index] @ learner._q[s]) for s in range(k))
    padded = np.zeros((len(xr), len(xr)))
    padded[:k, :k] = learner._q
    assert v2 == pytest.approx(chain, abs=1e-9)
    assert v2 == pytest.approx(xr @ padded @ reduced, abs=1e-9)


@pytest.mark.parametrize("kind", ["hidden", "uniform"])
def test_round_invariants_against_adaptive_opponent(kind):
    game = make_hidden_game(128, 4, 0.5, seed=8) if kind == "hidden" else make_uniform_game(128, 8)
    T = 1500
    start = pure_oracle(game, OpponentHistory.of([0]))
    learner = CombinedLearner(128, T, seed=3, initial_action=start)
    adv = AdaptiveBestResponse(game)
    prev = None
    for _ in range(T):
        y = adv.opponent(prev)
        x = learner.play()
        gains = adv.gains(y) / game.g_max
        learner.update(gains)
        _round_invariants(learner, x, gains)
        if kind == "hidden":
            assert set(learner.support.actions) <= set(game.hidden)
        prev = x


def test_restart_resets_only_copies():
    a1 = np.zeros((64, 64))
    a1[5, :] = 1.0
    game = HiddenGame(n=64, hidden=(1, 5), rho=0.5, a1=a1)
    learner = CombinedLearner(64, 1024, seed=1, initial_action=1)
    rng = np.random.default_rng(0)
    for _ in range(12):
        before = (learner.master.cum_gains.copy(), learner.fpl.cum_gains.copy(), learner.fpl.oracle_calls)
        learner.play()
        if learner.tracker.restarted:
            k = len(learner.support)
            np.testing.assert_array_equal(learner.copy_gains, np.zeros((k, k)))
            np.testing.assert_array_equal(learner.master.cum_gains, before[0])
            np.testing.assert_array_equal(learner.fpl.cum_gains, before[1])
            assert learner.copy_eta == pytest.approx(math.sqrt(8 * math.log(k) / (1024 - learner.t + 1)))
        learner.update(game.gain_vector(MixedStrategy.from_dense(rng.random(64))) / 2)
    assert learner.support.epoch >= 1


def test_pinned_beta_without_leader_term():
    learner = CombinedLearner(16, 64, seed=0, beta=(0.0, 1.0))
    rng = np.random.default_rng(1)
    for _ in range(64):
        x = learner.play()
        assert set(x.support.tolist()) <= set(learner.support.actions)
        learner.update(rng.random(16))


def test_horizon_exhausted():
    learner = CombinedLearner(4, 1, seed=0)
    learner.play()
    learner.update(np.zeros(4))
    with pytest.raises(RuntimeError):
        learner.play()
