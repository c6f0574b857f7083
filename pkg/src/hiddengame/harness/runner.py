"""Experiment runner: one learner against one adversary, per seed."""

from __future__ import annotations

import csv
import io
import json
import logging
import zlib
from dataclasses import astuple, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from ..combined import CombinedLearner
from ..core import DENSE_LIMIT, HiddenGame, MixedStrategy
from ..hidden import HiddenSetSwap
from ..learners import FPL, Hedge
from ..metrics import JointEmpirical, PlayTrace, RegretTracker, ce_gap, cce_gap
from ..oracles import OpponentHistory, pure_oracle
from ..swap import BlumMansour
from .adversaries import AdaptiveBestResponse, FixedMixed, IIDRandom, SelfPlay
from .config import ExperimentConfig

log = logging.getLogger(__name__)


@dataclass
class RoundRecord:
    t: int
    gain: float
    ext_regret: float
    swap_regret: float
    support_size: Optional[int] = None
    epoch: Optional[int] = None
    residual: Optional[float] = None
    beta1: Optional[float] = None
    beta2: Optional[float] = None
    oracle_calls: Optional[int] = None


CSV_FIELDS = [f.name for f in fields(RoundRecord)]


@dataclass
class SeedResult:
    seed: int
    summary: dict
    records: list[RoundRecord] = field(default_factory=list)
    trace: Optional[PlayTrace] = None
    supports: list[tuple[int, ...]] = field(default_factory=list)


def substream(seed: int, name: str) -> int:
    """Independent integer seed for a named use of the run seed."""
    ss = np.random.SeedSequence([seed & 0xFFFFFFFF, seed >> 32 & 0xFFFFFFFF, zlib.crc32(name.encode())])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)


def normalizer(game):
    """Affine map of the game's payoff range onto [0, 1]."""
    if game is None:
        return lambda g: g
    lo, hi = float(game.lo), float(game.hi)
    if lo == 0.0:
        return lambda g: g / hi
    return lambda g: (g - lo) / (hi - lo)


def initial_action(game, mode: str) -> int:
    if mode == "zero" or game is None:
        return 0
    return pure_oracle(game, OpponentHistory.of([0]))


def make_learner(algorithm: str, n: int, horizon: int, seed: int, start: int = 0,
                 beta=None):
    if algorithm == "hedge":
        return Hedge(n, horizon=horizon)
    if algorithm == "fpl":
        return FPL(n, horizon, seed)
    if algorithm == "bm":
        return BlumMansour(n, horizon)
    if algorithm == "algo1":
        return HiddenSetSwap(n, horizon, initial_action=start)
    if algorithm == "combined":
        return CombinedLearner(n, horizon, seed, initial_action=start, beta=beta)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def build_adversary(config: ExperimentConfig, game, seed: int):
    n, T = game.n, config.T
    if config.adversary == "fixed_mixed":
        return FixedMixed(game, substream(seed, "adversary"))
    if config.adversary == "adaptive_br":
        return AdaptiveBestResponse(game)
    if config.adversary == "iid_random":
        return IIDRandom(n, substream(seed, "adversary"))
    own = config.build_opponent_game()
    opp_alg = config.opponent_algorithm or config.algorithm
    opp_start = initial_action(own, config.initial_support)
    opponent = make_learner(opp_alg, n, T, substream(seed, "opponent"), opp_start)
    return SelfPlay(game, opponent, own, normalizer(own))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def records_to_csv(records: list[RoundRecord], seed: int | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow((["seed"] if seed is not None else []) + CSV_FIELDS)
    prefix = [str(seed)] if seed is not None else []
    for rec in records:
        w.writerow(prefix + [_fmt(v) for v in astuple(rec)])
    return buf.getvalue()


def run_seed(config: ExperimentConfig, seed: int, *, game=None, record: bool = True,
             keep_trace: bool = False, beta=None) -> SeedResult:
    """Run one seed; deterministic given ``(config, seed)``.

    ``game`` may be passed to reuse an already built instance. ``beta`` pins
    the combined learner's master mixture.
    """
    game = config.build_game() if game is None else game
    n, T = game.n, config.T
    norm = normalizer(None if config.adversary == "iid_random" else game)
    start = initial_action(None if config.adversary == "iid_random" else game,
                           config.initial_support)
    learner = make_learner(config.algorithm, n, T, substream(seed, "perturbation"), start, beta)

    adversary = build_adversary(config, game, seed)

    tracker = RegretTracker(n)
    joint = JointEmpirical(n) if config.adversary != "iid_random" and n <= DENSE_LIMIT else None
    trace = PlayTrace() if keep_trace else None
    checkpoints = set(config.checkpoints)
    result = SeedResult(seed, {})
    result.trace = trace
    snapshots = []
    track_support = hasattr(learner, "support")

    prev_x: MixedStrategy | None = None
    for t in range(1, T + 1):
        y = adversary.opponent(prev_x)
        x = learner.play()
        gains = adversary.gains(y)
        adversary.observe(x, y)
        learner.update(norm(gains))
        gained = tracker.update(x, gains)
        if joint is not None:
            joint.add(x, y)
        if trace is not None:
            trace.append(x, gains.copy())
        if track_support:
            result.supports.append(learner.support.actions)
        if record:
            d = learner.diagnostics()
            result.records.append(RoundRecord(
                t, gained, tracker.external, tracker.swap,
                d.get("support_size"), d.get("epoch"), d.get("residual"),
                d.get("beta1"), d.get("beta2"), d.get("oracle_calls")))
        if t in checkpoints:
            snap = {"t": t, "external_regret": tracker.external, "swap_regret": tracker.swap}
            if joint is not None:
                snap.update(_gaps(joint, game, adversary))
            snapshots.append(snap)
        prev_x = x

    summary = {"seed": seed, "external_regret": tracker.external, "swap_regret": tracker.swap,
               "ce_gap": None, "cce_gap": None, "T": T, "N": n,
               "r": game.r if isinstance(game, HiddenGame) else None}
    if joint is not None:
        summary.update(_gaps(joint, game, adversary))
    if isinstance(adversary, SelfPlay):
        summary["opponent_external_regret"] = adversary.tracker.external
        summary["opponent_swap_regret"] = adversary.tracker.swap
    if hasattr(learner, "oracle_calls"):
        summary["oracle_calls"] = learner.oracle_calls
    if snapshots:
        summary["checkpoints"] = snapshots
    result.summary = summary
    return result


def _gaps(joint: JointEmpirical, game, adversary) -> dict:
    p = joint.distribution()
    out = {"ce_gap": ce_gap(p, game), "cce_gap": cce_gap(p, game)}
    if isinstance(adversary, SelfPlay):
        out["opponent_ce_gap"] = ce_gap(p.T, adversary.own_game)
        out["opponent_cce_gap"] = cce_gap(p.T, adversary.own_game)
    return out


def aggregate(summaries: list[dict]) -> dict:
    """Mean and standard deviation of every numeric metric across seeds."""
    keys = [k for k, v in summaries[0].items()
            if isinstance(v, (int, float)) and not isinstance(v, bool) and k != "seed"]
    out = {}
    for k in keys:
        vals = np.array([s[k] for s in summaries if s.get(k) is not None], dtype=float)
        if vals.size:
            out[k] = {"mean": float(vals.mean()), "std": float(vals.std())}
    return out


def run(config: ExperimentConfig, *, record: bool = True) -> list[SeedResult]:
    """Run every seed and, if ``config.out`` is set, write CSV and summary files.

    Output directory layout: ``seed_<s>.csv`` per seed, ``rounds.csv`` with a
    leading seed column, and ``summary.json``.
    """
    game = config.build_game()
    results = []
    for seed in config.seeds:
        log.info("running %s vs %s, seed %d, T=%d", config.algorithm, config.adversary, seed, config.T)
        results.append(run_seed(config, seed, game=game, record=record or config.out is not None))
    if config.out is not None:
        write_outputs(config, results)
    return results


def write_outputs(config: ExperimentConfig, results: list[SeedResult]) -> None:
    out = Path(config.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        merged = []
        for res in results:
            (out / f"seed_{res.seed}.csv").write_text(records_to_csv(res.records))
            body = records_to_csv(res.records, seed=res.seed)
            merged.append(body if not merged else body.split("\n", 1)[1])
        (out / "rounds.csv").write_text("".join(merged))
        summary = {"config": config.model_dump(),
                   "seeds": [r.summary for r in results],
                   "aggregate": aggregate([r.summary for r in results])}
        (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write results under {out}: {exc}") from exc
