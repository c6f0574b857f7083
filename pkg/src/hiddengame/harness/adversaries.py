"""Opponents for repeated play: fixed, adaptive, stochastic and self-play."""

from __future__ import annotations

import numpy as np

from ..core import MixedStrategy
from ..metrics import RegretTracker

FIXED_SUPPORT = 32


class FixedMixed:
    """The same seeded mixed strategy every round."""

    kind = "fixed_mixed"

    def __init__(self, game, seed: int, strategy: MixedStrategy | None = None):
        if strategy is None:
            rng = np.random.default_rng(seed)
            k = min(game.n, FIXED_SUPPORT)
            support = np.sort(rng.choice(game.n, size=k, replace=False))
            strategy = MixedStrategy(support, rng.dirichlet(np.ones(k)))
        self.strategy = strategy
        self._gains = game.gain_vector(strategy)
        self._gains.setflags(write=False)

    def opponent(self, prev_x):
        return self.strategy

    def gains(self, y):
        return self._gains

    def observe(self, x, y):
        pass


class AdaptiveBestResponse:
    """Pure action minimizing the learner's expected gain against its previous strategy.

    Before the first round the learner's previous strategy is taken to be
    action 0.
    """

    kind = "adaptive_br"

    def __init__(self, game):
        self.game = game

    def opponent(self, prev_x):
        x = MixedStrategy.pure(0) if prev_x is None else prev_x
        return MixedStrategy.pure(int(np.argmin(self.game.row_mix(x))))

    def gains(self, y):
        # a column of a row-major matrix is strided; copy once so later passes are contiguous
        return np.ascontiguousarray(self.game.column(int(y.support[0])))

    def observe(self, x, y):
        pass


class IIDRandom:
    """Fresh uniform [0, 1] gain vectors, no game matrix involved."""

    kind = "iid_random"

    def __init__(self, n: int, seed: int):
        self.n = n
        self.rng = np.random.default_rng(seed)

    def opponent(self, prev_x):
        return None

    def gains(self, y):
        return self.rng.random(self.n)

    def observe(self, x, y):
        pass


class SelfPlay:
    """A second learner choosing the opponent's strategy.

    ``own_game`` is the second player's payoff matrix indexed by its own
    action first; its gains each round are ``own_game @ x_t``.
    """

    kind = "self_play"

    def __init__(self, game, learner, own_game, normalize):
        self.game = game
        self.learner = learner
        self.own_game = own_game
        self.normalize = normalize
        self.tracker = RegretTracker(own_game.n)

    def opponent(self, prev_x):
        return self.learner.play()

    def gains(self, y):
        return self.game.gain_vector(y)

    def observe(self, x, y):
        g = self.own_game.gain_vector(x)
        self.tracker.update(y, g)
        self.learner.update(self.normalize(g))
