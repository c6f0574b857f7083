"""Pure and smooth best-response oracles over a game's action space."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import STREAM_PERTURBATION, MixedStrategy, hash_uniform


@dataclass(frozen=True)
class OpponentHistory:
    """Weighted opponent actions ``(j_s, w_s)`` over rounds ``window = (t0, t1)``."""

    actions: np.ndarray
    weights: np.ndarray
    window: tuple[int, int] | None = None

    def __post_init__(self):
        actions = np.asarray(self.actions, dtype=np.int64).reshape(-1)
        weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if actions.shape != weights.shape:
            raise ValueError("actions and weights must be aligned")
        if np.any(weights < 0):
            raise ValueError("history weights must be nonnegative")
        if self.window is not None and self.window[0] > self.window[1]:
            raise ValueError(f"invalid window {self.window}")
        object.__setattr__(self, "actions", actions)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def of(cls, actions: Sequence[int], weights: Sequence[float] | None = None) -> OpponentHistory:
        weights = np.ones(len(actions)) if weights is None else weights
        return cls(np.asarray(actions), np.asarray(weights))

    def __len__(self) -> int:
        return self.actions.size


@dataclass(frozen=True)
class PerturbationSpec:
    """Exponential perturbation with rate ``eta``, drawn per coordinate from ``seed``.

    ``eta = inf`` is the degenerate zero-perturbation case.
    """

    eta: float
    seed: int = 0

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")

    def draw(self, n: int) -> np.ndarray:
        """Perturbation of actions ``0..n-1``; coordinate ``i`` depends only on ``(seed, i)``."""
        if math.isinf(self.eta):
            return np.zeros(n)
        u = hash_uniform(self.seed, STREAM_PERTURBATION, np.arange(n))
        return -np.log1p(-u) / self.eta


class OracleCounter:
    """Unit-cost accounting of smooth-oracle calls for one experiment."""

    def __init__(self):
        self.calls = 0

    def tick(self) -> None:
        self.calls += 1


def history_scores(game, history: OpponentHistory) -> np.ndarray:
    """``sum_s w_s * A[:, j_s]``, the cumulative gain of every action."""
    if history.actions.size and (history.actions.min() < 0 or history.actions.max() >= game.n):
        raise ValueError("history contains an action outside the game")
    totals = np.bincount(history.actions, weights=history.weights, minlength=game.n)
    cols = np.flatnonzero(totals)
    if game.dense_matrix is not None:
        return game.dense_matrix[:, cols] @ totals[cols]
    out = np.zeros(game.n)
    for j in cols:
        out += totals[j] * game.column(int(j))
    return out


def pure_oracle(game, history: OpponentHistory) -> int:
    """Best response to the weighted history; ties go to the smallest index."""
    if len(history) == 0:
        raise ValueError("pure oracle needs a nonempty history")
    return int(np.argmax(history_scores(game, history)))


def smooth_argmax(scores: np.ndarray, noise: np.ndarray) -> int:
    return int(np.argmax(scores + noise))


def smooth_oracle(game, history: OpponentHistory, perturbation: PerturbationSpec,
                  counter: OracleCounter | None = None) -> int:
    """Best response to the history plus an exponential perturbation of every action."""
    scores = history_scores(game, history) if len(history) else np.zeros(game.n)
    if counter is not None:
        counter.tick()
    return smooth_argmax(scores, perturbation.draw(game.n))


def weighted_history(rounds: Sequence[tuple[MixedStrategy, int]], i: int,
                     t0: int, t1: int, n: int | None = None) -> OpponentHistory:
    """History ``(j_s, x_s(i))`` for rounds ``t0..t1`` (1-based, inclusive).

    Feeding the result to :func:`pure_oracle` gives the weighted best response
    of action ``i`` when gains are ``A e_{j_s}``.
    """
    if i < 0 or (n is not None and i >= n):
        raise ValueError(f"action {i} outside the action range")
    if not 1 <= t0 <= t1 <= len(rounds):
        raise ValueError(f"window [{t0}, {t1}] outside recorded rounds 1..{len(rounds)}")
    picked = rounds[t0 - 1:t1]
    return OpponentHistory(np.array([j for _, j in picked]),
                           np.array([x.prob(i) for x, _ in picked]), window=(t0, t1))
