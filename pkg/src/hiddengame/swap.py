"""Blum-Mansour swap-regret reduction and the stationary-distribution solver."""

from __future__ import annotations

import numpy as np

from .core import MixedStrategy
from .learners import hedge_eta, softmax

DAMPING = 0.99
MAX_DOUBLINGS = 64


class StationarySolveError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (best residual {residual:.3e})")
        self.residual = residual


def check_row_stochastic(m: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ValueError(f"expected a nonempty square matrix, got shape {m.shape}")
    if np.any(m < 0) or np.any(np.abs(m.sum(axis=1) - 1.0) > tol):
        raise ValueError("matrix is not row-stochastic")
    return m


def residual(m: np.ndarray, x: np.ndarray) -> float:
    """``||M^T x - x||_1``."""
    return float(np.abs(m.T @ x - x).sum())


def _normalize(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, None)
    return x / x.sum()


def _direct_solve(m: np.ndarray) -> np.ndarray:
    d = m.shape[0]
    lhs = np.vstack([m.T - np.eye(d), np.ones((1, d))])
    rhs = np.zeros(d + 1)
    rhs[-1] = 1.0
    x, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    if not np.all(np.isfinite(x)) or x.clip(0.0, None).sum() <= 0:
        return np.full(d, 1.0 / d)
    return _normalize(x)


def stationary(m: np.ndarray, eps: float, validate: bool = True) -> np.ndarray:
    return stationary_with_residual(m, eps, validate)[0]


def stationary_with_residual(m: np.ndarray, eps: float,
                             validate: bool = True) -> tuple[np.ndarray, float]:
    """Distribution ``x`` with ``||M^T x - x||_1 <= eps`` for row-stochastic ``M``.

    Damped power iteration on ``M^T`` from the uniform vector, where the
    iteration matrix is squared after each step so the effective number of
    plain iterations doubles. A least-squares solve of ``(M^T - I) x = 0,
    1^T x = 1`` takes over if the iteration stalls above ``eps``.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if validate:
        m = check_row_stochastic(m)
    d = m.shape[0]
    if d == 1:
        return np.ones(1), 0.0

    x = np.full(d, 1.0 / d)
    mt = m.T
    w = DAMPING * mt
    w.flat[::d + 1] += 1.0 - DAMPING
    best_x, best_res = x, float(np.abs(mt @ x - x).sum())
    stalled = 0
    for _ in range(MAX_DOUBLINGS):
        if best_res <= eps:
            return best_x, best_res
        # w stays column-stochastic, so x stays on the simplex up to rounding
        x = w @ x
        x /= x.sum()
        res = float(np.abs(mt @ x - x).sum())
        if res < best_res:
            stalled = 0 if res < 0.5 * best_res else stalled + 1
            best_x, best_res = x, res
        else:
            stalled += 1
        if stalled >= 3:
            break
        w = w @ w
    if best_res <= eps:
        return best_x, best_res

    x = _direct_solve(m)
    res = residual(m, x)
    if res < best_res:
        best_x, best_res = x, res
    if best_res > eps:
        raise StationarySolveError(f"no {eps:.1e}-stationary point found", best_res)
    return best_x, best_res


class BlumMansour:
    """Swap-regret learner built from one Hedge copy per action.

    Copy ``s`` sees the gains scaled by the probability of ``s``; its
    distribution is row ``s`` of ``Q`` and the play is the stationary
    distribution of ``Q``.
    """

    def __init__(self, dim: int, horizon: int, eps: float = 1e-10):
        if dim < 1:
            raise ValueError("dim must be at least 1")
        self.dim = dim
        self.eta = hedge_eta(dim, horizon)
        self.eps = eps
        self.cum_gains = np.zeros((dim, dim))
        self._last: np.ndarray | None = None
        self.last_residual: float | None = None

    def matrix(self) -> np.ndarray:
        return softmax(self.eta * self.cum_gains, axis=1)

    def copy_distribution(self, s: int) -> np.ndarray:
        return softmax(self.eta * self.cum_gains[s])

    def strategy(self) -> tuple[np.ndarray, np.ndarray]:
        q = self.matrix()
        x, self.last_residual = stationary_with_residual(q, self.eps, validate=False)
        return x, q

    def play(self) -> MixedStrategy:
        x, _ = self.strategy()
        self._last = x
        return MixedStrategy.from_dense(x)

    def update(self, gains: np.ndarray, x: np.ndarray | None = None) -> None:
        """Give copy ``s`` the gains ``x(s) * gains``; ``x`` defaults to the last play."""
        gains = np.asarray(gains, dtype=np.float64)
        x = self._last if x is None else np.asarray(x, dtype=np.float64)
        if x is None:
            raise ValueError("no strategy to attribute gains to")
        if gains.shape != (self.dim,) or x.shape != (self.dim,):
            raise ValueError("dimension mismatch")
        self.cum_gains += np.outer(x, gains)

    def diagnostics(self) -> dict:
        return {"residual": self.last_residual}


def bm_strategy(state: BlumMansour) -> tuple[MixedStrategy, np.ndarray]:
    x, q = state.strategy()
    return MixedStrategy.from_dense(x), q


def bm_update(state: BlumMansour, x: MixedStrategy, gains: np.ndarray) -> BlumMansour:
    state.update(gains, x.dense(state.dim))
    return state

