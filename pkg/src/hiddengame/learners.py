"""External-regret learners: Hedge over a simplex and Follow-the-Perturbed-Leader over [N].

Both consume gain vectors already scaled into [0, 1].
"""

from __future__ import annotations

import math

import numpy as np

from .core import MixedStrategy
from .oracles import OracleCounter, PerturbationSpec, smooth_argmax


def hedge_eta(dim: int, horizon: int) -> float:
    """Fixed-horizon step size ``sqrt(8 ln dim / T)``."""
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    # a one-action simplex has a constant distribution; any positive rate works
    return math.sqrt(8.0 * math.log(dim) / horizon) if dim > 1 else 1.0


def softmax(z: np.ndarray, axis: int = -1) -> np.ndarray:
    w = np.exp(z - z.max(axis=axis, keepdims=True))
    return w / w.sum(axis=axis, keepdims=True)


class Hedge:
    """Multiplicative weights over ``dim`` actions."""

    def __init__(self, dim: int, eta: float | None = None, horizon: int | None = None):
        if dim < 1:
            raise ValueError("dim must be at least 1")
        if eta is None:
            if horizon is None:
                raise ValueError("give either eta or horizon")
            eta = hedge_eta(dim, horizon)
        if not eta > 0:
            raise ValueError("eta must be positive")
        self.dim = dim
        self.eta = float(eta)
        self.cum_gains = np.zeros(dim)

    def distribution(self) -> np.ndarray:
        return softmax(self.eta * self.cum_gains)

    def play(self) -> MixedStrategy:
        return MixedStrategy.from_dense(self.distribution())

    def update(self, gains: np.ndarray) -> None:
        gains = np.asarray(gains, dtype=np.float64)
        if gains.shape != (self.dim,):
            raise ValueError(f"expected {self.dim} gains, got shape {gains.shape}")
        self.cum_gains += gains

    def regret_bound(self, horizon: int) -> float:
        """``ln(dim)/eta + eta*T/8``, the worst case on [0, 1] gains."""
        return math.log(self.dim) / self.eta + self.eta * horizon / 8.0

    def diagnostics(self) -> dict:
        return {}


def hedge_distribution(state: Hedge) -> np.ndarray:
    return state.distribution()


def hedge_update(state: Hedge, gains: np.ndarray) -> Hedge:
    state.update(gains)
    return state


class FPL:
    """Follow-the-Perturbed-Leader over ``n`` actions.

    Each selection is one smooth-oracle call: the argmax over actions of the
    cumulative gains plus an exponential perturbation. Over the simplex a
    linear objective peaks at a vertex, so plays are pure actions.

    By default the perturbation is drawn once before the first round. With
    ``redraw=True`` every later round draws a fresh exponential vector from a
    generator seeded by ``seed``, which keeps the guarantee against
    adversaries that react to past plays.
    """

    def __init__(self, n: int, horizon: int, seed: int, eta: float | None = None,
                 redraw: bool = False):
        if n < 2 or horizon < 1:
            raise ValueError("FPL needs N >= 2 and T >= 1")
        self.n = n
        self.eta = math.sqrt(math.log(n) / horizon) if eta is None else float(eta)
        self.perturbation = PerturbationSpec(self.eta, seed)
        self.redraw = redraw
        self.noise = self.perturbation.draw(n)
        self._rng = np.random.default_rng(seed) if redraw else None
        self.cum_gains = np.zeros(n)
        self.counter = OracleCounter()

    @property
    def oracle_calls(self) -> int:
        return self.counter.calls

    def select(self) -> int:
        self.counter.tick()
        if self.redraw and self.counter.calls > 1:
            self.noise = self._rng.standard_exponential(self.n)
            self.noise /= self.eta
        return smooth_argmax(self.cum_gains, self.noise)

    def play(self) -> MixedStrategy:
        return MixedStrategy.pure(self.select())

    def update(self, gains: np.ndarray) -> None:
        self.cum_gains += gains

    def diagnostics(self) -> dict:
        return {"oracle_calls": self.counter.calls}


def fpl_init(n: int, horizon: int, seed: int) -> FPL:
    return FPL(n, horizon, seed)
