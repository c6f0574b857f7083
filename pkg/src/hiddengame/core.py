"""Game instances, mixed strategies and payoff evaluation.

Payoff matrices are indexed ``A[own_action, opponent_action]``. Every entry is
treated as a gain: learners maximize.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Sequence

import numpy as np

# Largest action count for which A1 is materialized as a dense matrix.
DENSE_LIMIT = 4096

_MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)

# Named hash streams so independent quantities never share draws.
STREAM_A1 = 1
STREAM_PERTURBATION = 2
STREAM_UNIFORM_GAME = 3


def _splitmix(z: np.ndarray) -> np.ndarray:
    z = z + _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@lru_cache(maxsize=256)
def _stream_key(seed: int, stream: int) -> np.uint64:
    with np.errstate(over="ignore"):
        key = _splitmix(np.array([seed & _MASK64], dtype=np.uint64))
        return _splitmix(key ^ np.array([stream & _MASK64], dtype=np.uint64))[0]


def hash_uniform(seed: int, stream: int, i, j=None) -> np.ndarray:
    """Counter-based uniforms in [0, 1) keyed by ``(seed, stream, i[, j])``.

    ``i`` and ``j`` broadcast against each other, so a column vector and a row
    vector yield a matrix. The same key always gives the same value, which is
    what lets a dense matrix and on-demand rows/columns agree bit for bit.
    """
    key = _stream_key(seed, stream)
    with np.errstate(over="ignore"):
        h = _splitmix(key ^ np.asarray(i, dtype=np.uint64))
        if j is not None:
            h = _splitmix(h ^ (np.asarray(j, dtype=np.uint64) * _MIX2))
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


@dataclass(frozen=True)
class MixedStrategy:
    """Sparse probability distribution over actions."""

    support: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        support = np.asarray(self.support, dtype=np.int64).reshape(-1)
        probs = np.asarray(self.probs, dtype=np.float64).reshape(-1)
        if support.shape != probs.shape or support.size == 0:
            raise ValueError("support and probs must be nonempty and aligned")
        if support.size > 1 and np.any(np.diff(support) <= 0):
            raise ValueError("support must be strictly increasing")
        if support[0] < 0:
            raise ValueError("negative action index")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise ValueError("probabilities must be finite and nonnegative")
        if abs(probs.sum() - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {probs.sum()!r}, not 1")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def _trusted(cls, support: np.ndarray, probs: np.ndarray) -> MixedStrategy:
        # skips validation; callers guarantee sorted support and normalized probs
        obj = object.__new__(cls)
        object.__setattr__(obj, "support", support)
        object.__setattr__(obj, "probs", probs)
        return obj

    @classmethod
    def pure(cls, i: int) -> MixedStrategy:
        if i < 0:
            raise ValueError("negative action index")
        return cls._trusted(np.array([i], dtype=np.int64), np.ones(1))

    @classmethod
    def uniform(cls, n: int) -> MixedStrategy:
        return cls(np.arange(n), np.full(n, 1.0 / n))

    @classmethod
    def from_dense(cls, vec, actions=None, validate: bool = True) -> MixedStrategy:
        """Build from a dense probability vector, dropping exact zeros.

        ``actions`` optionally names the action behind each coordinate (any
        order); by default coordinate ``k`` is action ``k``. ``validate=False``
        is for solver output already known to be a distribution over distinct
        actions.
        """
        vec = np.asarray(vec, dtype=np.float64).reshape(-1)
        if not validate:
            keep = vec > 0
            acts = np.flatnonzero(keep) if actions is None else actions[keep]
            vec = vec[keep]
            if acts.size > 1 and (acts[1:] < acts[:-1]).any():
                order = np.argsort(acts)
                acts, vec = acts[order], vec[order]
            return cls._trusted(acts, vec / vec.sum())
        total = vec.sum()
        if not (np.isfinite(total) and total > 0) or vec.min() < 0:
            raise ValueError("probabilities must be finite, nonnegative and not all zero")
        acts = np.arange(vec.size) if actions is None else np.asarray(actions, dtype=np.int64)
        if acts.shape != vec.shape:
            raise ValueError("actions and probabilities must be aligned")
        keep = vec > 0
        acts, vec = acts[keep], vec[keep]
        if acts.size > 1:
            order = np.argsort(acts, kind="stable")
            acts, vec = acts[order], vec[order]
            if (acts[1:] == acts[:-1]).any():
                raise ValueError("duplicate action")
        if acts[0] < 0:
            raise ValueError("negative action index")
        return cls._trusted(acts, vec / vec.sum())

    def dense(self, n: int) -> np.ndarray:
        if self.support[-1] >= n:
            raise ValueError(f"strategy has action {self.support[-1]} outside [0, {n})")
        out = np.zeros(n)
        out[self.support] = self.probs
        return out

    def prob(self, i: int) -> float:
        k = np.searchsorted(self.support, i)
        if k < self.support.size and self.support[k] == i:
            return float(self.probs[k])
        return 0.0

    def __eq__(self, other):
        if not isinstance(other, MixedStrategy):
            return NotImplemented
        return np.array_equal(self.support, other.support) and np.array_equal(self.probs, other.probs)

    __hash__ = None


class _Game:
    """Shared evaluation for matrix-backed games."""

    n: int
    g_max: float

    def _check_action(self, i: int) -> int:
        if not 0 <= int(i) < self.n:
            raise ValueError(f"action {i} outside [0, {self.n})")
        return int(i)

    def payoff(self, i: int, j: int) -> float:
        i, j = self._check_action(i), self._check_action(j)
        return float(self.row(i)[j])

    def gain_vector(self, y: MixedStrategy) -> np.ndarray:
        """Gain of every own action against opponent strategy ``y``: ``A @ y``."""
        if y.support[-1] >= self.n:
            raise ValueError(f"opponent strategy has action {y.support[-1]} outside [0, {self.n})")
        if self.dense_matrix is not None:
            return self.dense_matrix[:, y.support] @ y.probs
        out = np.zeros(self.n)
        for j, p in zip(y.support, y.probs):
            out += p * self.column(int(j))
        return out

    def row_mix(self, x: MixedStrategy) -> np.ndarray:
        """Expected gain ``x^T A`` of strategy ``x`` against every opponent action."""
        if self.dense_matrix is not None:
            return x.probs @ self.dense_matrix[x.support]
        out = np.zeros(self.n)
        for i, p in zip(x.support, x.probs):
            out += p * self.row(int(i))
        return out

    @property
    def dense_matrix(self) -> np.ndarray | None:
        raise NotImplementedError

    def matrix(self) -> np.ndarray:
        m = self.dense_matrix
        if m is None:
            m = np.stack([self.row(i) for i in range(self.n)])
        return m


@dataclass(frozen=True, eq=False)
class GameMatrix(_Game):
    """Explicit payoff matrix with declared bounds ``[lo, hi]``."""

    entries: np.ndarray
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        a = np.array(self.entries, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"payoff matrix must be square, got shape {a.shape}")
        if not np.all(np.isfinite(a)) or a.min() < self.lo or a.max() > self.hi:
            raise ValueError(f"entries must lie in [{self.lo}, {self.hi}]")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def g_max(self) -> float:
        return float(self.hi)

    @property
    def dense_matrix(self) -> np.ndarray:
        return self.entries

    def row(self, i: int) -> np.ndarray:
        return self.entries[i]

    def column(self, j: int) -> np.ndarray:
        return self.entries[:, j]


@dataclass(frozen=True, eq=False)
class HiddenGame(_Game):
    """Payoffs ``A(i, j) = 1[i in R] + rho * A1(i, j)`` with ``A1`` in [0, 1].

    ``A1`` is either given explicitly or generated from ``seed`` by hashing
    ``(seed, i, j)``; the generated form is dense up to ``DENSE_LIMIT``
    actions and computed on demand above that.
    """

    n: int
    hidden: tuple[int, ...]
    rho: float
    seed: int | None = None
    role: int = 1
    a1: np.ndarray | None = field(default=None, repr=False)
    _dense: np.ndarray | None = field(default=None, init=False, repr=False)
    _mask: np.ndarray = field(default=None, init=False, repr=False)

    g_max = 2.0
    lo = 0.0
    hi = 2.0

    def __post_init__(self):
        hidden = tuple(sorted(int(i) for i in self.hidden))
        if len(set(hidden)) != len(hidden) or not hidden:
            raise ValueError("hidden set must be nonempty without duplicates")
        if hidden[0] < 0 or hidden[-1] >= self.n:
            raise ValueError(f"hidden actions must lie in [0, {self.n})")
        if len(hidden) >= self.n:
            raise ValueError("hidden set must be a proper subset")
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}")
        if self.role not in (1, 2):
            raise ValueError("role must be 1 or 2")
        mask = np.zeros(self.n, dtype=bool)
        mask[list(hidden)] = True
        object.__setattr__(self, "hidden", hidden)
        object.__setattr__(self, "_mask", mask)

        if self.a1 is not None:
            a1 = np.array(self.a1, dtype=np.float64)
            if a1.shape != (self.n, self.n):
                raise ValueError(f"A1 must have shape {(self.n, self.n)}")
            if a1.min() < 0.0 or a1.max() > 1.0:
                raise ValueError("A1 entries must lie in [0, 1]")
            a1.setflags(write=False)
            object.__setattr__(self, "a1", a1)
        elif self.seed is None:
            raise ValueError("either a1 or seed is required")
        elif self.n > DENSE_LIMIT:
            return
        else:
            idx = np.arange(self.n)
            a1 = hash_uniform(self.seed, STREAM_A1, idx[:, None], idx[None, :])
        dense = mask[:, None] + self.rho * a1
        dense.setflags(write=False)
        object.__setattr__(self, "_dense", dense)

    @property
    def r(self) -> int:
        return len(self.hidden)

    @property
    def hidden_mask(self) -> np.ndarray:
        return self._mask

    @property
    def dense_matrix(self) -> np.ndarray | None:
        return self._dense

    def row(self, i: int) -> np.ndarray:
        if self._dense is not None:
            return self._dense[i]
        a1 = hash_uniform(self.seed, STREAM_A1, i, np.arange(self.n))
        return float(self._mask[i]) + self.rho * a1

    def column(self, j: int) -> np.ndarray:
        if self._dense is not None:
            return self._dense[:, j]
        a1 = hash_uniform(self.seed, STREAM_A1, np.arange(self.n), j)
        return self._mask + self.rho * a1

    def payoff(self, i: int, j: int) -> float:
        i, j = self._check_action(i), self._check_action(j)
        if self._dense is not None:
            return float(self._dense[i, j])
        return float(self._mask[i]) + self.rho * float(hash_uniform(self.seed, STREAM_A1, i, j))


@dataclass(frozen=True, eq=False)
class UniformGame(GameMatrix):
    """Generic game with i.i.d. uniform [0, 1] payoffs generated from ``seed``."""

    seed: int = 0

    @classmethod
    def create(cls, n: int, seed: int) -> UniformGame:
        idx = np.arange(n)
        entries = hash_uniform(seed, STREAM_UNIFORM_GAME, idx[:, None], idx[None, :])
        return cls(entries, 0.0, 1.0, int(seed))



def payoff(game: _Game, i: int, j: int) -> float:
    return game.payoff(i, j)


def gain_vector(game: _Game, y: MixedStrategy) -> np.ndarray:
    return game.gain_vector(y)


def make_hidden_game(n: int, r: int, rho: float, seed: int, role: int = 1) -> HiddenGame:
    """Hidden game with a uniformly random ``r``-subset ``R`` and i.i.d. uniform ``A1``."""
    if not 1 <= r < n:
        raise ValueError(f"need 1 <= r < N, got r={r}, N={n}")
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    rng = np.random.default_rng([seed & _MASK64, 0x52])
    hidden = tuple(int(i) for i in np.sort(rng.choice(n, size=r, replace=False)))
    return HiddenGame(n=n, hidden=hidden, rho=float(rho), seed=int(seed), role=role)


def make_uniform_game(n: int, seed: int) -> UniformGame:
    """Game without hidden structure, for runs where only external regret is guaranteed."""
    return UniformGame.create(n, seed)


# -- serialization -----------------------------------------------------------

def game_to_dict(game: _Game) -> dict[str, Any]:
    if isinstance(game, HiddenGame) and game.a1 is None:
        return {"n": game.n, "r": game.r, "rho": game.rho, "seed": game.seed,
                "role": game.role, "hidden": list(game.hidden)}
    if isinstance(game, UniformGame):
        return {"n": game.n, "seed": game.seed, "kind": "uniform"}
    return {"n": game.n, "entries": game.matrix().tolist(), "lo": game.lo, "hi": game.hi}


def game_from_dict(doc: dict[str, Any]) -> _Game:
    """Inverse of :func:`game_to_dict`.

    Generator form ``{n, r, rho, seed[, role]}`` rebuilds the hidden game from
    its seed; an optional ``hidden`` list pins ``R`` explicitly. Explicit form
    is ``{n, entries[, lo, hi]}``; ``{n, seed, kind: "uniform"}`` names a
    seeded generic game.
    """
    try:
        n = int(doc["n"])
        if "entries" in doc:
            entries = np.asarray(doc["entries"], dtype=np.float64)
            if entries.shape != (n, n):
                raise ValueError(f"entries must be {n}x{n}")
            return GameMatrix(entries, lo=float(doc.get("lo", 0.0)),
                              hi=float(doc.get("hi", max(1.0, float(entries.max())))))
        if doc.get("kind") == "uniform":
            return UniformGame.create(n, int(doc["seed"]))
        role = int(doc.get("role", 1))
        if "hidden" in doc:
            hidden = tuple(int(i) for i in doc["hidden"])
            if "r" in doc and int(doc["r"]) != len(hidden):
                raise ValueError("r disagrees with the hidden list")
            return HiddenGame(n=n, hidden=hidden, rho=float(doc["rho"]),
                              seed=int(doc["seed"]), role=role)
        return make_hidden_game(n, int(doc["r"]), float(doc["rho"]), int(doc["seed"]), role)
    except KeyError as exc:
        raise ValueError(f"game document missing field {exc}") from None


def load_game(source: str | Path) -> _Game:
    """Load a game from a JSON file path or an inline JSON string."""
    text = str(source)
    if not text.lstrip().startswith("{"):
        text = Path(text).read_text()
    return game_from_dict(json.loads(text))


def check_gains(gains: np.ndarray, g_max: float, n: int | None = None) -> np.ndarray:
    gains = np.asarray(gains, dtype=np.float64)
    if gains.ndim != 1 or (n is not None and gains.size != n):
        raise ValueError(f"gain vector must have length {n}, got shape {gains.shape}")
    if not np.all(np.isfinite(gains)) or gains.min() < 0.0 or gains.max() > g_max:
        raise ValueError(f"gains must lie in [0, {g_max}]")
    return gains


def as_actions(actions: Sequence[int]) -> tuple[int, ...]:
    out = tuple(sorted({int(a) for a in actions}))
    if not out:
        raise ValueError("action set must be nonempty")
    return out


def log2_ceil(x: int) -> int:
    """Exact ``ceil(log2(x))`` for positive integers."""
    return (int(x) - 1).bit_length()
