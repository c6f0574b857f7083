"""Acceptance checks at full size and stated tolerances.

Each check returns a :class:`CheckResult`; :func:`run_checks` runs a
selection and prints one PASS/FAIL line per check. Shared by the test suite
and the ``verify`` command.
"""

from __future__ import annotations

import itertools
import math
import os
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np

from .core import HiddenGame, MixedStrategy
from .harness.config import ExperimentConfig
from .harness.runner import (build_adversary, initial_action, make_learner, normalizer,
                             run_seed, substream)
from .learners import Hedge
from .metrics import PlayTrace, RegretTracker, swap_regret
from .swap import residual, stationary


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return (f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d} {self.name}: "
                f"{self.detail} ({self.seconds:.1f}s)")


@lru_cache(maxsize=None)
def _summary(game: tuple, algorithm: str, adversary: str, T: int, seed: int) -> dict:
    # cached so checks sharing a configuration do not rerun it
    cfg = ExperimentConfig(game=dict(game), algorithm=algorithm, adversary=adversary,
                           T=T, seeds=[seed])
    return run_seed(cfg, seed, game=_game(game), record=False).summary


@lru_cache(maxsize=8)
def _game(game: tuple):
    return ExperimentConfig(game=dict(game), algorithm="hedge", adversary="iid_random",
                            T=1, seeds=[0]).build_game()


def _mean(game: dict, algorithm: str, adversary: str, T: int, seeds, key: str) -> float:
    doc = tuple(sorted(game.items()))
    return float(np.mean([_summary(doc, algorithm, adversary, T, s)[key] for s in seeds]))


# 1 -------------------------------------------------------------------------

CONTAINMENT_GRID = list(itertools.product((64, 256, 1024), (2, 4, 8), (0.25, 0.5, 0.9)))
CONTAINMENT_ADVERSARIES = ("fixed_mixed", "adaptive_br")


def support_violations(config: ExperimentConfig, game: HiddenGame, seed: int) -> int:
    """Rounds where the support leaves ``R`` or the play leaves the support (algo1)."""
    T, n = config.T, game.n
    start = initial_action(game, config.initial_support)
    learner = make_learner(config.algorithm, n, T, substream(seed, "perturbation"), start)
    adversary = build_adversary(config, game, seed)
    norm = normalizer(game)
    hidden = set(game.hidden)
    bad = 0
    prev = None
    for _ in range(T):
        y = adversary.opponent(prev)
        x = learner.play()
        s = learner.support.actions
        if not hidden.issuperset(s):
            bad += 1
        elif config.algorithm == "algo1" and not set(x.support.tolist()) <= set(s):
            bad += 1
        g = adversary.gains(y)
        adversary.observe(x, y)
        learner.update(norm(g))
        prev = x
    return bad


def check_containment(n_games: int = 100, T: int = 2 ** 12, budget: float = 120.0) -> CheckResult:
    t0 = time.perf_counter()
    failures = []
    for k in range(n_games):
        n, r, rho = CONTAINMENT_GRID[k % len(CONTAINMENT_GRID)]
        adversary = CONTAINMENT_ADVERSARIES[k % 2]
        doc = {"n": n, "r": r, "rho": rho, "seed": 1000 + k}
        for alg in ("algo1", "combined"):
            cfg = ExperimentConfig(game=doc, algorithm=alg, adversary=adversary, T=T, seeds=[k])
            bad = support_violations(cfg, cfg.build_game(), k)
            if bad:
                failures.append(f"{alg} {doc} {adversary}: {bad} rounds")
    dt = time.perf_counter() - t0
    detail = f"{n_games} games x 2 algorithms, {len(failures)} violating runs, budget {budget:.0f}s"
    if failures:
        detail += "; first: " + failures[0]
    return CheckResult(1, "support stays inside the hidden set", not failures and dt < budget,
                       detail, dt)


# 2 -------------------------------------------------------------------------

def random_row_stochastic(rng: np.random.Generator, dim: int) -> np.ndarray:
    m = rng.random((dim, dim)) ** rng.choice([1.0, 4.0])
    return m / m.sum(axis=1, keepdims=True)


def eig_stationary(m: np.ndarray) -> np.ndarray:
    """Reference: left eigenvector of ``M`` for the eigenvalue closest to 1."""
    vals, vecs = np.linalg.eig(m.T)
    v = np.real(vecs[:, np.argmin(np.abs(vals - 1.0))])
    return v / v.sum()


def check_fixed_point(n_matrices: int = 1000, T: int = 2 ** 12) -> CheckResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240)
    worst_res = worst_err = 0.0
    for _ in range(n_matrices):
        m = random_row_stochastic(rng, int(rng.integers(1, 17)))
        x = stationary(m, 1e-10)
        worst_res = max(worst_res, residual(m, x))
        worst_err = max(worst_err, float(np.abs(x - eig_stationary(m)).max()))

    # per-round contract of the combined learner, read back from its trace
    trace_bad = 0
    for doc in ({"n": 256, "r": 4, "rho": 0.5, "seed": 5}, {"n": 256, "seed": 5, "kind": "uniform"}):
        for adversary in ("adaptive_br", "fixed_mixed"):
            cfg = ExperimentConfig(game=doc, algorithm="combined", adversary=adversary, T=T, seeds=[0])
            res = run_seed(cfg, 0, record=True)
            trace_bad += sum(rec.residual > 1.0 / math.sqrt(rec.t) for rec in res.records)
    ok = worst_res <= 1e-10 and worst_err <= 1e-8 and trace_bad == 0
    detail = (f"max residual {worst_res:.2e} (<= 1e-10), max eigensolver gap {worst_err:.2e} "
              f"(<= 1e-8), {trace_bad} trace rounds above 1/sqrt(t)")
    return CheckResult(2, "fixed-point residual", ok, detail, time.perf_counter() - t0)


# 3 -------------------------------------------------------------------------

def brute_force_swap(strategies: np.ndarray, gains: np.ndarray) -> float:
    """Max over all ``N^N`` maps ``sigma`` of the gain from swapping ``i -> sigma(i)``."""
    n = strategies.shape[1]
    base = float((strategies * gains).sum())
    best = -math.inf
    for sigma in itertools.product(range(n), repeat=n):
        moved = float((strategies * gains[:, list(sigma)]).sum())
        best = max(best, moved)
    return best - base


def check_swap_oracle(n_traces: int = 200) -> CheckResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(n_traces):
        n, T = int(rng.integers(1, 6)), int(rng.integers(1, 21))
        xs = rng.dirichlet(np.ones(n) * 0.5, size=T)
        xs[rng.random(T) < 0.3] = np.eye(n)[rng.integers(0, n)]
        gs = rng.random((T, n))
        ref = brute_force_swap(xs, gs)
        tracker, trace = RegretTracker(n), PlayTrace()
        for x, g in zip(xs, gs):
            ms = MixedStrategy.from_dense(x)
            tracker.update(ms, g)
            trace.append(ms, g)
        worst = max(worst, abs(swap_regret(trace) - ref), abs(tracker.swap - ref))
    return CheckResult(3, "swap regret equals exhaustive search", worst <= 1e-9,
                       f"{n_traces} traces, max deviation {worst:.2e} (<= 1e-9)",
                       time.perf_counter() - t0)


# 4 -------------------------------------------------------------------------

def adversarial_sequence(kind: str, dim: int, T: int, rng: np.random.Generator):
    """Gain generator reacting to the learner's current distribution."""
    fixed = rng.random((T, dim))
    block = max(1, int(math.sqrt(T)))

    def gains(t: int, p: np.ndarray) -> np.ndarray:
        if kind == "starve_leader":
            g = np.ones(dim)
            g[np.argmax(p)] = 0.0
        elif kind == "reward_laggard":
            g = np.zeros(dim)
            g[np.argmin(p)] = 1.0
        elif kind == "switching":
            g = np.zeros(dim)
            g[(t // block) % dim] = 1.0
        else:
            g = (fixed[t] < 0.5 + 0.1 * (np.arange(dim) == 0)).astype(float)
        return g

    return gains


def check_hedge(n_sequences: int = 50, T: int = 10_000) -> CheckResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    kinds = ("starve_leader", "reward_laggard", "switching", "biased_coin")
    worst = 0.0
    for k in range(n_sequences):
        dim = (2, 8, 32)[k % 3]
        gen = adversarial_sequence(kinds[k % len(kinds)], dim, T, rng)
        h = Hedge(dim, horizon=T)
        total, realized = np.zeros(dim), 0.0
        for t in range(T):
            p = h.distribution()
            g = gen(t, p)
            realized += float(p @ g)
            total += g
            h.update(g)
        worst = max(worst, (total.max() - realized) / (2 * math.sqrt(T * math.log(dim))))
    return CheckResult(4, "Hedge external regret", worst <= 1.0,
                       f"max regret / 2 sqrt(T ln dim) = {worst:.3f} (<= 1)",
                       time.perf_counter() - t0)


# 5 -------------------------------------------------------------------------

def check_fpl(T: int = 2 ** 13, seeds=range(50)) -> CheckResult:
    t0 = time.perf_counter()
    parts, ok = [], True
    for n in (64, 1024):
        doc = {"n": n, "seed": 17, "kind": "uniform"}
        cfg = ExperimentConfig(game=doc, algorithm="fpl", adversary="fixed_mixed", T=T, seeds=list(seeds))
        game = cfg.build_game()
        regrets, calls = [], set()
        for s in seeds:
            summ = run_seed(cfg, s, game=game, record=False).summary
            regrets.append(summ["external_regret"])
            calls.add(summ["oracle_calls"])
        bound = 4 * math.sqrt(T * math.log(n))
        ok &= np.mean(regrets) <= bound and calls == {T}
        parts.append(f"N={n}: mean {np.mean(regrets):.1f} <= {bound:.1f}, oracle calls {sorted(calls)}")
    return CheckResult(5, "FPL external regret", ok, "; ".join(parts), time.perf_counter() - t0)


# 6 -------------------------------------------------------------------------

def check_blum_mansour(T: int = 2 ** 14, seeds=range(20)) -> CheckResult:
    t0 = time.perf_counter()
    parts, ok = [], True
    for dim in (4, 8):
        doc = {"n": dim, "seed": 0, "kind": "uniform"}
        mean = _mean(doc, "bm", "iid_random", T, seeds, "swap_regret")
        bound = 3 * math.sqrt(T * dim * math.log(dim))
        ok &= mean <= bound
        parts.append(f"dim={dim}: mean swap {mean:.1f} <= {bound:.1f}")
    return CheckResult(6, "Blum-Mansour swap regret", ok, "; ".join(parts), time.perf_counter() - t0)


# 7 -------------------------------------------------------------------------

def combined_games(n: int) -> dict[str, dict]:
    return {"hidden": {"n": n, "r": 4, "rho": 0.5, "seed": 23},
            "uniform": {"n": n, "seed": 23, "kind": "uniform"}}


def check_combined_external(T: int = 2 ** 14, seeds=range(20)) -> CheckResult:
    t0 = time.perf_counter()
    parts, ok = [], True
    for n in (256, 1024):
        for kind, doc in combined_games(n).items():
            full = _mean(doc, "combined", "adaptive_br", T, seeds, "external_regret")
            half = _mean(doc, "combined", "adaptive_br", T // 2, seeds, "external_regret")
            bound = 4 * math.sqrt(T * math.log(n))
            ratio = full / half if half > 0 else math.inf
            ok &= full <= bound and ratio <= 1.6
            parts.append(f"{kind} N={n}: {full:.1f} <= {bound:.1f}, growth {ratio:.3f} <= 1.6")
    return CheckResult(7, "combined external regret", ok, "; ".join(parts), time.perf_counter() - t0)


# 8 -------------------------------------------------------------------------

def check_combined_swap(horizons=(2 ** 12, 2 ** 13, 2 ** 14), seeds=range(20)) -> CheckResult:
    t0 = time.perf_counter()
    parts, ok = [], True
    T = horizons[-1]
    for r in (2, 4, 8):
        doc = {"n": 1024, "r": r, "rho": 0.5, "seed": 23}
        means = [_mean(doc, "combined", "adaptive_br", h, seeds, "swap_regret") for h in horizons]
        per_round = [m / h for m, h in zip(means, horizons)]
        bound = 4 * math.sqrt(T * r ** 3 * math.log(max(r, 2)))
        decreasing = all(b < a for a, b in zip(per_round, per_round[1:]))
        ok &= means[-1] <= bound and decreasing
        parts.append(f"r={r}: {means[-1]:.1f} <= {bound:.1f}, per round "
                     + " > ".join(f"{v:.4f}" for v in per_round))
    return CheckResult(8, "combined swap regret on hidden games", ok, "; ".join(parts),
                       time.perf_counter() - t0)


# 9 -------------------------------------------------------------------------

def check_self_play(T: int = 2 ** 14, seeds=range(10), r: int = 4) -> CheckResult:
    t0 = time.perf_counter()
    checkpoints = [2 ** 10, 2 ** 12, T]
    cfg = ExperimentConfig(game={"n": 256, "r": r, "rho": 0.5, "seed": 31}, algorithm="combined",
                           adversary="self_play", T=T, seeds=list(seeds), checkpoints=checkpoints)
    game = cfg.build_game()
    gaps = np.array([[c["ce_gap"] for c in run_seed(cfg, s, game=game, record=False).summary["checkpoints"]]
                     for s in seeds])
    mean = gaps.mean(axis=0)
    bound = 2 * math.sqrt(r ** 3 * math.log(r) / T)
    ok = bool(np.all(np.diff(mean) < 0)) and mean[-1] <= bound
    detail = ("mean CE gap " + " > ".join(f"{v:.4f}" for v in mean)
              + f" at t={checkpoints}, final <= {bound:.4f}")
    return CheckResult(9, "self-play CE gap", ok, detail, time.perf_counter() - t0)


# 10 ------------------------------------------------------------------------

DETERMINISM_RUNS = [
    ["--alg", "combined", "--adversary", "adaptive_br", "--game-spec", '{"n": 64, "r": 4, "rho": 0.5, "seed": 1}'],
    ["--alg", "algo1", "--adversary", "fixed_mixed", "--game-spec", '{"n": 64, "r": 2, "rho": 0.9, "seed": 2}'],
    ["--alg", "fpl", "--adversary", "fixed_mixed", "--game-spec", '{"n": 64, "seed": 3, "kind": "uniform"}'],
    ["--alg", "bm", "--adversary", "iid_random", "--game-spec", '{"n": 6, "seed": 4, "kind": "uniform"}'],
    ["--alg", "combined", "--adversary", "self_play", "--game-spec", '{"n": 32, "r": 3, "rho": 0.25, "seed": 5}'],
]


def _cli(args: list[str]) -> None:
    env = dict(os.environ)
    src = str(Path(__file__).resolve().parents[1])
    env["PYTHONPATH"] = src + os.pathsep + env.get("PYTHONPATH", "")
    subprocess.run([sys.executable, "-m", "hiddengame.harness.cli", "run", *args],
                   check=True, capture_output=True, env=env)


def check_determinism(T: int = 500) -> CheckResult:
    t0 = time.perf_counter()
    mismatched, compared = [], 0
    with tempfile.TemporaryDirectory() as tmp:
        for k, args in enumerate(DETERMINISM_RUNS):
            outs = []
            for rep in range(2):
                out = Path(tmp) / f"{k}_{rep}"
                _cli(args + ["--T", str(T), "--seeds", "0", "1", "--out", str(out)])
                outs.append(out)
            for f in sorted(outs[0].glob("*.csv")):
                compared += 1
                if f.read_bytes() != (outs[1] / f.name).read_bytes():
                    mismatched.append(f"{k}/{f.name}")
    ok = not mismatched and compared > 0
    return CheckResult(10, "byte-identical reruns", ok,
                       f"{compared} CSV files compared across two processes, {len(mismatched)} differ",
                       time.perf_counter() - t0)


CHECKS: dict[int, Callable[[], CheckResult]] = {
    1: check_containment, 2: check_fixed_point, 3: check_swap_oracle, 4: check_hedge,
    5: check_fpl, 6: check_blum_mansour, 7: check_combined_external, 8: check_combined_swap,
    9: check_self_play, 10: check_determinism,
}


def run_check(number: int) -> CheckResult:
    t0 = time.perf_counter()
    try:
        res = CHECKS[number]()
    except Exception as exc:  # a crash is a failure of that check, not of the suite
        res = CheckResult(number, CHECKS[number].__name__, False, f"error: {exc!r}")
    res.seconds = time.perf_counter() - t0
    return res


def _echo(line: str) -> None:
    print(line, flush=True)


def run_checks(numbers=None, echo: Callable[[str], None] = _echo) -> list[CheckResult]:
    results = []
    for k in sorted(numbers or CHECKS):
        res = run_check(k)
        echo(res.line())
        results.append(res)
    return results
