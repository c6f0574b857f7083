"""Exact regret and equilibrium-gap computation from recorded play."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import MixedStrategy


@dataclass
class PlayTrace:
    """Strategies ``x_t`` and the gain vectors they were scored against."""

    strategies: list[MixedStrategy] = field(default_factory=list)
    gains: list[np.ndarray] = field(default_factory=list)

    def append(self, x: MixedStrategy, gains: np.ndarray) -> None:
        self.strategies.append(x)
        self.gains.append(np.asarray(gains, dtype=np.float64))

    def __len__(self) -> int:
        return len(self.strategies)

    def realized(self) -> np.ndarray:
        return np.array([g[x.support] @ x.probs for x, g in zip(self.strategies, self.gains)])


def _check(trace: PlayTrace) -> None:
    if len(trace) == 0:
        raise ValueError("empty trace")


def external_regret(trace: PlayTrace) -> float:
    """Best fixed action's total gain minus the realized total (may be negative)."""
    _check(trace)
    total = np.sum(trace.gains, axis=0)
    return float(total.max() - trace.realized().sum())


def swap_regret(trace: PlayTrace) -> float:
    """Best per-action reassignment's gain over the realized play.

    The maximum over swap functions separates by action:
    ``sum_i max_k sum_t x_t(i) * (gain_t(k) - gain_t(i))``. Each term is
    nonnegative since ``k = i`` is allowed.
    """
    _check(trace)
    acc: dict[int, np.ndarray] = {}
    for x, g in zip(trace.strategies, trace.gains):
        for i, p in zip(x.support.tolist(), x.probs):
            if i in acc:
                acc[i] += p * g
            else:
                acc[i] = p * g
    return float(sum(v.max() - v[i] for i, v in acc.items()))


class RegretTracker:
    """Streaming external and swap regret.

    Keeps one accumulator ``sum_t x_t(i) * gain_t`` per action ever played,
    and refreshes the swap term of an action only in rounds where it is
    played.
    """

    def __init__(self, n: int):
        self.n = n
        self.total = np.zeros(n)
        self.realized = 0.0
        self.rounds = 0
        self._row: dict[int, int] = {}
        self._acc = np.zeros((8, n))
        self._terms = np.zeros(8)
        self._last_support: np.ndarray | None = None
        self._last_rows = np.zeros(0, dtype=np.int64)

    def _rows(self, support: np.ndarray) -> np.ndarray:
        # supports repeat across rounds, so the last lookup is usually reusable
        if self._last_support is not None and np.array_equal(support, self._last_support):
            return self._last_rows
        rows = []
        for i in support.tolist():
            k = self._row.get(i)
            if k is None:
                k = len(self._row)
                if k == self._acc.shape[0]:
                    self._acc = np.vstack([self._acc, np.zeros_like(self._acc)])
                    self._terms = np.concatenate([self._terms, np.zeros_like(self._terms)])
                self._row[i] = k
            rows.append(k)
        self._last_support, self._last_rows = support, np.array(rows)
        return self._last_rows

    def update(self, x: MixedStrategy, gains: np.ndarray) -> float:
        """Record one round; returns the realized gain ``x^T gains``."""
        gained = float(gains[x.support] @ x.probs)
        self.total += gains
        self.realized += gained
        self.rounds += 1
        rows = self._rows(x.support)
        sub = self._acc[rows] + x.probs[:, None] * gains
        self._acc[rows] = sub
        self._terms[rows] = sub.max(axis=1) - sub[np.arange(rows.size), x.support]
        return gained

    @property
    def external(self) -> float:
        return float(self.total.max() - self.realized)

    @property
    def swap(self) -> float:
        return float(self._terms[:len(self._row)].sum())


class JointEmpirical:
    """Accumulated product play ``sum_t x_t (x) y_t``, normalized on read."""

    def __init__(self, n1: int, n2: int | None = None):
        self.counts = np.zeros((n1, n1 if n2 is None else n2))
        self.rounds = 0

    def add(self, x: MixedStrategy, y: MixedStrategy) -> None:
        self.counts[x.support[:, None], y.support] += x.probs[:, None] * y.probs
        self.rounds += 1

    def distribution(self) -> np.ndarray:
        if self.rounds == 0:
            raise ValueError("no rounds recorded")
        return self.counts / self.rounds


def _as_matrix(game) -> np.ndarray:
    return game if isinstance(game, np.ndarray) else game.matrix()


def cce_gap(joint: np.ndarray, game) -> float:
    """Gain from the best fixed deviation of the row player, floored at 0.

    ``joint[i, j]`` is the probability of own action ``i`` with opponent
    action ``j``; ``game`` is the row player's own-action payoff matrix.
    """
    a = _as_matrix(game)
    if joint.shape != a.shape:
        raise ValueError(f"joint {joint.shape} and game {a.shape} disagree")
    deviation = a @ joint.sum(axis=0)
    return max(0.0, float(deviation.max() - np.sum(joint * a)))


def ce_gap(joint: np.ndarray, game) -> float:
    """``sum_i max_k sum_j p(i, j) * (A(k, j) - A(i, j))``, zero exactly at a CE."""
    a = _as_matrix(game)
    if joint.shape != a.shape:
        raise ValueError(f"joint {joint.shape} and game {a.shape} disagree")
    rows = np.flatnonzero(joint.sum(axis=1) > 0)
    if rows.size == 0:
        return 0.0
    dev = joint[rows] @ a.T  # dev[r, k] = sum_j p(i_r, j) A(k, j)
    stay = dev[np.arange(rows.size), rows]
    return float(np.sum(np.maximum(dev.max(axis=1) - stay, 0.0)))


def summarize(tracker: RegretTracker) -> dict:
    return {"external_regret": tracker.external, "swap_regret": tracker.swap,
            "T": tracker.rounds, "N": tracker.n}
