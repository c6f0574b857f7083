"""Simultaneous external- and swap-regret minimization.

Per round: Hedge copies over the support give rows of ``Q``, FPL over all
actions gives a leader ``n_t`` and the rank-one ``P = 1 e_{n_t}^T``, a master
Hedge over two meta-actions mixes them into ``M``, and the play is an
approximate stationary point of ``M`` on the reduced space
``S_t + {n_t}``.
"""

from __future__ import annotations

import math

import numpy as np

from .core import MixedStrategy
from .hidden import SupportSet, SupportTracker
from .learners import FPL, Hedge, hedge_eta, softmax
from .swap import stationary_with_residual


def build_p(n_index: int, dim: int) -> np.ndarray:
    """Every row equal to ``e_{n_index}``."""
    p = np.zeros((dim, dim))
    p[:, n_index] = 1.0
    return p


def build_q_tilde(q: np.ndarray, leader_outside: bool) -> np.ndarray:
    """Stack copy distributions, adding a self-loop row for a leader outside the support.

    The extra coordinate (last index) keeps the reduced matrix row-stochastic;
    the support rows put no mass on it.
    """
    if not leader_outside:
        return q
    k = q.shape[0]
    out = np.zeros((k + 1, k + 1))
    out[:k, :k] = q
    out[k, k] = 1.0
    return out


def combine(beta: np.ndarray, p: np.ndarray, q_tilde: np.ndarray) -> np.ndarray:
    if p.shape != q_tilde.shape:
        raise ValueError(f"shape mismatch {p.shape} vs {q_tilde.shape}")
    return beta[0] * p + beta[1] * q_tilde


class CombinedLearner:
    """External regret against all actions, swap regret on a hidden set.

    ``beta`` pins the master mixture (test hook); by default the master is
    Hedge over two meta-actions.
    """

    def __init__(self, n: int, horizon: int, seed: int, initial_action: int = 0,
                 beta: tuple[float, float] | None = None):
        self.n = n
        self.horizon = horizon
        self.tracker = SupportTracker(n, horizon, initial_action)
        # fresh perturbation each round: a single draw makes the leader
        # deterministic and exploitable by an adversary reacting to past plays
        self.fpl = FPL(n, horizon, seed, redraw=True)
        self.master = Hedge(2, horizon=horizon)
        self.beta_override = None if beta is None else np.asarray(beta, dtype=np.float64)
        self._restart_copies(horizon)
        self.t = 0
        self.leader = -1
        self.beta = np.array([0.5, 0.5])
        self.residual = 0.0
        self.meta_gains = (0.0, 0.0)
        self._x = np.ones(1)
        self._q = np.ones((1, 1))

    @property
    def support(self) -> SupportSet:
        return self.tracker.support

    @property
    def oracle_calls(self) -> int:
        return self.fpl.oracle_calls

    def _restart_copies(self, remaining: int) -> None:
        k = len(self.tracker.support)
        self.copy_eta = hedge_eta(k, remaining)
        self.copy_gains = np.zeros((k, k))

    def copy_matrix(self) -> np.ndarray:
        return softmax(self.copy_eta * self.copy_gains, axis=1)

    def play(self) -> MixedStrategy:
        if self.t >= self.horizon:
            raise RuntimeError("horizon exhausted")
        self.t += 1
        t = self.t
        if self.tracker.advance(t):
            self._restart_copies(self.horizon - t + 1)

        actions = self.support.actions
        k = len(actions)
        q = self.copy_matrix()
        leader = self.fpl.select()
        beta = self.master.distribution() if self.beta_override is None else self.beta_override

        # reduced indexing: support members in order, then the leader if new
        pos = int(np.searchsorted(self.tracker.index, leader))
        inside = pos < k and actions[pos] == leader
        if beta[0] == 0.0:
            # without P an outside leader is an isolated state; keep the play on S_t
            inside, m = True, q
        else:
            dim = k if inside else k + 1
            m = combine(beta, build_p(pos if inside else k, dim), build_q_tilde(q, not inside))
        x, self.residual = stationary_with_residual(m, 1.0 / math.sqrt(t), validate=False)

        self.leader, self.beta, self._q = leader, beta, q
        self._x = x
        self._m = m
        labels = self.tracker.index if inside else np.append(self.tracker.index, leader)
        return MixedStrategy.from_dense(x, labels, validate=False)

    def update(self, gains: np.ndarray) -> None:
        k = len(self.support)
        xs = self._x[:k]
        gs = gains[self.tracker.index]
        self.fpl.update(gains)
        self.copy_gains += np.outer(xs, gs)
        # meta gains use the zero-padded copy matrix: support rows only
        v1 = float(gains[self.leader])
        v2 = float(xs @ (self._q @ gs))
        self.meta_gains = (v1, v2)
        self.master.update(np.array([v1, v2]))
        self.tracker.record(self.t, xs, gains)

    def diagnostics(self) -> dict:
        return {"support_size": len(self.support), "epoch": self.support.epoch,
                "restart": self.tracker.restarted, "residual": self.residual,
                "beta1": float(self.beta[0]), "beta2": float(self.beta[1]),
                "leader": self.leader, "v1": self.meta_gains[0], "v2": self.meta_gains[1],
                "oracle_calls": self.fpl.oracle_calls}


def combined_round(state: CombinedLearner, gains: np.ndarray) -> tuple[MixedStrategy, CombinedLearner]:
    """Play one round against a gain vector fixed in advance (oblivious setting)."""
    x = state.play()
    state.update(gains)
    return x, state
