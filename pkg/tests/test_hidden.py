import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hiddengame.core import HiddenGame, MixedStrategy, log2_ceil, make_hidden_game
from hiddengame.hidden import (HiddenSetSwap, SupportSet, SupportTracker, WeightedGainLedger,
                               algo1_round, expand, weighted_br)
from hiddengame.metrics import RegretTracker
from hiddengame.oracles import OpponentHistory, pure_oracle


def test_weighted_br_zero_ledger_ties_to_zero():
    assert weighted_br(WeightedGainLedger(6, [2], 1), 2) == 0


def test_weighted_br_unit_vector():
    led = WeightedGainLedger(6, [2], 1)
    led.record(np.array([1.0]), np.eye(6)[3])
    assert weighted_br(led, 2) == 3


def test_weighted_br_lands_in_hidden_set():
    g = make_hidden_game(64, 4, 0.5, seed=12)
    rng = np.random.default_rng(0)
    led = WeightedGainLedger(64, [g.hidden[0], 7], 1)
    for _ in range(10):
        led.record(rng.dirichlet([1, 1]), g.column(int(rng.integers(64))))
    for i in led.actions:
        ref = max(range(64), key=lambda k: (led.vector(i)[k], -k))
        assert weighted_br(led, i) == ref
        assert ref in g.hidden


def test_expand_idempotent_when_closed():
    led = WeightedGainLedger(4, [1, 3], 1)
    led.record(np.array([0.5, 0.5]), np.array([0.0, 1.0, 0.0, 0.5]))
    s = SupportSet((1, 3))
    assert expand(s, led, 2, 64) is s


def test_expand_at_most_doubles():
    rng = np.random.default_rng(1)
    for _ in range(50):
        acts = tuple(sorted(rng.choice(20, size=int(rng.integers(1, 6)), replace=False)))
        led = WeightedGainLedger(20, acts, 1)
        led.record(rng.dirichlet(np.ones(len(acts))), rng.random(20))
        grown = expand(SupportSet(acts), led, 2, 1024)
        assert len(grown) <= 2 * len(acts)
        assert set(acts) <= set(grown.actions)


def test_expand_adds_constructed_best_response():
    a1 = np.zeros((8, 8))
    a1[5, :] = 1.0
    g = HiddenGame(n=8, hidden=(1, 5), rho=0.5, a1=a1)
    led = WeightedGainLedger(8, [1], 1)
    for j in (0, 4, 7):
        led.record(np.array([1.0]), g.column(j))
    assert int(np.argmax(led.vector(1))) == 5  # brute-force argmax
    grown = expand(SupportSet((1,)), led, 2, 64)
    assert grown.actions == (1, 5) and grown.epoch == 1 and grown.epoch_start == 2


def test_expand_window():
    led = WeightedGainLedger(4, [0], 1)
    led.record(np.array([1.0]), np.array([0.0, 0.0, 1.0, 0.0]))
    s = SupportSet((0,))
    assert expand(s, led, 1, 64) is s          # t = 1 never expands
    assert expand(s, led, 7, 64) is s          # past ceil(log2 64) = 6
    assert expand(s, led, 6, 64).actions == (0, 2)


def test_expand_skips_members_without_mass():
    led = WeightedGainLedger(4, [2, 3], 1)
    led.record(np.array([1.0, 0.0]), np.array([0.0, 0.0, 1.0, 0.5]))
    assert expand(SupportSet((2, 3)), led, 2, 64).actions == (2, 3)


def test_first_round_plays_initial_action():
    x, _ = algo1_round(HiddenSetSwap(10, 100), np.random.default_rng(0).random(10))
    assert x == MixedStrategy.pure(0)


def _run_algo1(game, T, rng, start):
    learner = HiddenSetSwap(game.n, T, initial_action=start)
    history = []
    for t in range(1, T + 1):
        x = learner.play()
        y = MixedStrategy.from_dense(rng.dirichlet(np.ones(game.n) * 0.3))
        gains = game.gain_vector(y) / game.g_max
        history.append((t, learner.support, x, learner.tracker.ledger.start))
        learner.update(gains)
    return learner, history


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10 ** 6), r=st.integers(1, 6), rho=st.floats(0.05, 0.95),
       T=st.integers(2, 300))
def test_support_invariants(seed, r, rho, T):
    game = make_hidden_game(24, r, rho, seed)
    start = pure_oracle(game, OpponentHistory.of([0]))
    _, history = _run_algo1(game, T, np.random.default_rng(seed), start)
    epochs = history[-1][1].epoch
    assert epochs <= min(r, log2_ceil(T))
    for t, s, x, ledger_start in history:
        assert set(s.actions) <= set(game.hidden)
        assert len(s) <= min(r, 2 ** s.epoch)
        assert set(x.support.tolist()) <= set(s.actions)
        assert ledger_start == s.epoch_start <= t


def test_ledger_stops_after_last_expansion_round():
    tr = SupportTracker(8, 16, 0)
    for t in range(1, 9):
        tr.advance(t)
        tr.record(t, np.full(len(tr.support), 1.0 / len(tr.support)), np.ones(8))
    assert tr.ledger.rounds < tr.cap


def test_restart_reinitializes_swap_learner():
    a1 = np.zeros((6, 6))
    a1[4, :] = 1.0
    g = HiddenGame(n=6, hidden=(2, 4), rho=0.5, a1=a1)
    learner = HiddenSetSwap(6, 64, initial_action=2)
    learner.play()
    learner.update(g.column(0) / 2)
    learner.play()
    assert learner.support.actions == (2, 4) and learner.tracker.restarted
    assert learner.swap.dim == 2
    assert learner.swap.eta == pytest.approx(math.sqrt(8 * math.log(2) / 63))


def test_swap_regret_scale_on_hidden_game():
    game = make_hidden_game(256, 4, 0.5, seed=21)
    T, r = 2 ** 14, 4
    rng = np.random.default_rng(3)
    learner = HiddenSetSwap(256, T, initial_action=pure_oracle(game, OpponentHistory.of([0])))
    tracker = RegretTracker(256)
    y = MixedStrategy.from_dense(rng.dirichlet(np.ones(256)))
    gains = game.gain_vector(y)
    for _ in range(T):
        x = learner.play()
        learner.update(gains / 2)
        tracker.update(x, gains)
    assert tracker.swap / (r * math.sqrt(T * r * math.log(r))) <= 3
