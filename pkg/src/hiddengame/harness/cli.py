"""Command line: ``run`` an experiment, ``sweep`` a grid, ``verify`` the acceptance checks.

Exit codes: 0 success, 2 invalid configuration, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from .config import ExperimentConfig
from .runner import aggregate, run

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


def _validated(doc: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(doc)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def _game_spec(text: str) -> dict:
    """Inline JSON object or a path to a JSON file."""
    try:
        if not text.lstrip().startswith("{"):
            text = Path(text).read_text()
        doc = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read game spec: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("game spec must be a JSON object")
    return doc


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON experiment file; flags given alongside override it")
    p.add_argument("--game-spec", help="game as inline JSON or a JSON file path")
    p.add_argument("--alg", choices=["hedge", "fpl", "bm", "algo1", "combined"])
    p.add_argument("--adversary", choices=["fixed_mixed", "adaptive_br", "self_play", "iid_random"])
    p.add_argument("--T", type=int)
    p.add_argument("--seeds", type=int, nargs="+")
    p.add_argument("--out")


def build_config(args) -> ExperimentConfig:
    doc: dict = {}
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    overrides = {"game": _game_spec(args.game_spec) if args.game_spec else None,
                 "algorithm": args.alg, "adversary": args.adversary, "T": args.T,
                 "seeds": args.seeds, "out": args.out}
    doc.update({k: v for k, v in overrides.items() if v is not None})
    doc.setdefault("seeds", [0])
    missing = [k for k in ("game", "algorithm", "adversary", "T") if k not in doc]
    if missing:
        raise ConfigError(f"missing settings: {', '.join(missing)}")
    return _validated(doc)


def cmd_run(args) -> int:
    config = build_config(args)
    results = run(config, record=args.out is not None)
    summaries = [r.summary for r in results]
    print(json.dumps({"seeds": summaries, "aggregate": aggregate(summaries)}, indent=2, sort_keys=True))
    return EXIT_OK


SWEEP_FIELDS = ["r", "rho", "T", "seeds", "external_regret_mean", "external_regret_std",
                "swap_regret_mean", "swap_regret_std"]


def cmd_sweep(args) -> int:
    base = _game_spec(args.game_spec)
    if "kind" in base or "entries" in base:
        raise ConfigError("sweep needs a hidden-game spec with n and seed")
    configs = []
    for r, rho, T in itertools.product(args.r, args.rho, args.T):
        game = {k: v for k, v in base.items() if k != "hidden"}
        game.update(r=r, rho=rho)
        configs.append(_validated({"game": game, "algorithm": args.alg, "adversary": args.adversary,
                                   "T": T, "seeds": args.seeds}))
    rows = []
    for cfg in configs:
        agg = aggregate([res.summary for res in run(cfg, record=False)])
        rows.append({"r": cfg.game["r"], "rho": cfg.game["rho"], "T": cfg.T, "seeds": len(cfg.seeds),
                     "external_regret_mean": agg["external_regret"]["mean"],
                     "external_regret_std": agg["external_regret"]["std"],
                     "swap_regret_mean": agg["swap_regret"]["mean"],
                     "swap_regret_std": agg["swap_regret"]["std"]})
    out = sys.stdout if args.out is None else open(args.out, "w", newline="")
    try:
        w = csv.DictWriter(out, fieldnames=SWEEP_FIELDS, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_verify(args) -> int:
    from ..acceptance import run_checks

    results = run_checks(args.only)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} checks passed")
    return EXIT_OK if passed == len(results) else EXIT_RUNTIME


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hiddengame", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one experiment over one or more seeds")
    _add_run_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="grid over r, rho and T; one CSV row per cell")
    p.add_argument("--game-spec", required=True, help="base hidden game (n, seed)")
    p.add_argument("--alg", default="combined", choices=["hedge", "fpl", "bm", "algo1", "combined"])
    p.add_argument("--adversary", default="adaptive_br",
                   choices=["fixed_mixed", "adaptive_br", "self_play", "iid_random"])
    p.add_argument("--r", type=int, nargs="+", required=True)
    p.add_argument("--rho", type=float, nargs="+", required=True)
    p.add_argument("--T", type=int, nargs="+", required=True)
    p.add_argument("--seeds", type=int, nargs="+", default=[0])
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the acceptance checks")
    p.add_argument("--only", type=int, nargs="+", help="check numbers to run")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
