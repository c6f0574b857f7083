"""Hidden-set discovery: a growing support guess driven by weighted best responses.

The support starts from a single action. During the first ``ceil(log2 T)``
rounds each member ``i`` may pull in its weighted best response, the argmax of
``sum_{t'} x_{t'}(i) * gain_{t'}`` over the current epoch. Any change starts a
new epoch and restarts the swap-regret learner on the enlarged support.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import MixedStrategy, as_actions, log2_ceil
from .swap import BlumMansour


@dataclass(frozen=True)
class SupportSet:
    actions: tuple[int, ...]
    epoch_start: int = 1
    epoch: int = 0

    def __post_init__(self):
        object.__setattr__(self, "actions", as_actions(self.actions))

    def __len__(self) -> int:
        return len(self.actions)

    def __contains__(self, i) -> bool:
        return int(i) in self.actions


class WeightedGainLedger:
    """Per-action vectors ``L(i) = sum_{t'=t0}^{t} x_{t'}(i) * gain_{t'}``."""

    def __init__(self, n: int, actions, start: int):
        self.n = n
        self.actions = as_actions(actions)
        self.start = start
        self._row = {a: k for k, a in enumerate(self.actions)}
        self.vectors = np.zeros((len(self.actions), n))
        self.weights = np.zeros(len(self.actions))
        self.rounds = 0

    def record(self, probs: np.ndarray, gains: np.ndarray) -> None:
        """Add one round; ``probs[k]`` is the probability of ``actions[k]``."""
        self.vectors += np.outer(probs, gains)
        self.weights += probs
        self.rounds += 1

    def _index(self, i: int) -> int:
        try:
            return self._row[int(i)]
        except KeyError:
            raise ValueError(f"action {i} is not tracked by the ledger") from None

    def weight(self, i: int) -> float:
        return float(self.weights[self._index(i)])

    def vector(self, i: int) -> np.ndarray:
        return self.vectors[self._index(i)]

    def best_response(self, i: int) -> int:
        return int(np.argmax(self.vectors[self._index(i)]))


def weighted_br(ledger: WeightedGainLedger, i: int) -> int:
    """Weighted best response of ``i``; an all-zero ledger row gives action 0."""
    return ledger.best_response(i)


def expand(support: SupportSet, ledger: WeightedGainLedger, t: int, horizon: int) -> SupportSet:
    """Add each member's weighted best response, if ``1 < t <= ceil(log2 T)``.

    Members that received no probability mass in the window have no
    meaningful best response (every action ties) and contribute nothing.
    Returns ``support`` itself when nothing changes, otherwise a new epoch
    starting at ``t``.
    """
    if not 1 < t <= log2_ceil(horizon):
        return support
    grown = set(support.actions)
    for i in support.actions:
        if ledger.weight(i) > 0:
            grown.add(weighted_br(ledger, i))
    if len(grown) == len(support):
        return support
    return SupportSet(tuple(grown), epoch_start=t, epoch=support.epoch + 1)


class SupportTracker:
    """Support set, ledger and epoch bookkeeping shared by both hidden-game learners."""

    def __init__(self, n: int, horizon: int, initial_action: int = 0):
        if not 0 <= initial_action < n:
            raise ValueError(f"initial action {initial_action} outside [0, {n})")
        self.n = n
        self.horizon = horizon
        self.cap = log2_ceil(horizon)
        self.support = SupportSet((initial_action,))
        self.ledger = WeightedGainLedger(n, self.support.actions, 1)
        self.index = np.array(self.support.actions)
        self.restarted = False

    def advance(self, t: int) -> bool:
        """Run the expansion check for round ``t``; True when a new epoch began."""
        grown = expand(self.support, self.ledger, t, self.horizon)
        self.restarted = grown is not self.support
        if self.restarted:
            self.support = grown
            self.ledger = WeightedGainLedger(self.n, grown.actions, t)
            self.index = np.array(grown.actions)
        return self.restarted

    def record(self, t: int, probs: np.ndarray, gains: np.ndarray) -> None:
        # rounds at or past the last expansion round can never be read again
        if t < self.cap:
            self.ledger.record(probs, gains)


class HiddenSetSwap:
    """Swap-regret learner over a discovered support, restarted on every expansion.

    The swap subroutine is :class:`BlumMansour`; a restart at round ``t``
    tunes it for the remaining ``T - t + 1`` rounds.
    """

    def __init__(self, n: int, horizon: int, initial_action: int = 0, eps: float = 1e-10):
        self.n = n
        self.horizon = horizon
        self.eps = eps
        self.tracker = SupportTracker(n, horizon, initial_action)
        self.swap = BlumMansour(1, horizon, eps)
        self.t = 0
        self._x: np.ndarray | None = None

    @property
    def support(self) -> SupportSet:
        return self.tracker.support

    def play(self) -> MixedStrategy:
        if self.t >= self.horizon:
            raise RuntimeError("horizon exhausted")
        self.t += 1
        if self.tracker.advance(self.t):
            self.swap = BlumMansour(len(self.support), self.horizon - self.t + 1, self.eps)
        self._x, _ = self.swap.strategy()
        return MixedStrategy.from_dense(self._x, self.tracker.index, validate=False)

    def update(self, gains: np.ndarray) -> None:
        self.swap.update(gains[self.tracker.index], self._x)
        self.tracker.record(self.t, self._x, gains)

    def diagnostics(self) -> dict:
        return {"support_size": len(self.support), "epoch": self.support.epoch,
                "restart": self.tracker.restarted, "residual": self.swap.last_residual}


def algo1_round(state: HiddenSetSwap, gains: np.ndarray) -> tuple[MixedStrategy, HiddenSetSwap]:
    """Play one round against a gain vector fixed in advance (oblivious setting)."""
    x = state.play()
    state.update(gains)
    return x, state
