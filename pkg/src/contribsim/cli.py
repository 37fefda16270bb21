"""Command-line entry point: configure a sweep, run it, write the CSV.

Settings come from an optional INI-style config file (flat key=value entries
grouped in sections) overridden by command-line flags.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import sys

from .errors import ContractViolation, DataError
from .game import PayoffParams
from .harness import SCENARIOS, STRATEGIES, ExperimentConfig, sweep, write_results

log = logging.getLogger("contribsim")

# Config-file keys that map straight onto ExperimentConfig attributes.
_INT_KEYS = {
    "steps", "repetitions", "seed", "value_buckets", "cost_buckets",
    "pretrain_rounds", "data_steps",
}
_FLOAT_KEYS = {
    "epsilon", "p_contribute", "aspiration_step", "switch_scale",
    "aspiration_floor", "learning_rate", "discount", "eps_start", "eps_floor",
    "eps_warmup_fraction", "value_low", "value_high", "cost_sigma",
    "threshold_fraction",
}
_STR_KEYS = {"scenario", "strategy", "out", "grid_csv", "trace_csv"}
_BOOL_KEYS = {"include_privacy_cost"}


def _parse_populations(raw: str) -> list[int]:
    try:
        return [int(part) for part in raw.replace(" ", "").split(",") if part]
    except ValueError:
        raise ContractViolation(f"cannot parse population list {raw!r}") from None


def load_config_file(path: str) -> dict:
    """Read an INI config file into ExperimentConfig keyword arguments."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise DataError(f"cannot read config file {path}")
    kwargs: dict = {}
    payoff_kwargs: dict = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            if section == "payoffs":
                if key not in ("reward", "penalty"):
                    raise DataError(f"{path}: unknown payoff key {key!r}")
                payoff_kwargs["reward_G" if key == "reward" else "penalty_B"] = float(raw)
            elif key == "agents" or key == "population_sizes":
                kwargs["population_sizes"] = _parse_populations(raw)
            elif key == "reps":
                kwargs["repetitions"] = int(raw)
            elif key in _INT_KEYS:
                kwargs[key] = int(raw)
            elif key in _FLOAT_KEYS:
                kwargs[key] = float(raw)
            elif key in _STR_KEYS:
                kwargs[key] = raw
            elif key in _BOOL_KEYS:
                kwargs[key] = raw.strip().lower() in ("1", "true", "yes", "on")
            else:
                raise DataError(f"{path}: unknown config key {key!r}")
    if payoff_kwargs:
        kwargs["payoffs"] = PayoffParams(**payoff_kwargs)
    return kwargs


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contribsim",
        description="Simulate contribution strategies in a threshold "
        "public-goods game and write per-timestep measures as CSV.",
    )
    parser.add_argument("--config", help="INI config file; flags override it")
    parser.add_argument("--scenario", choices=SCENARIOS)
    parser.add_argument("--strategy", choices=STRATEGIES)
    parser.add_argument(
        "--agents", help="comma-separated population sizes, e.g. 10,20,50"
    )
    parser.add_argument("--steps", type=int, help="rounds per run")
    parser.add_argument("--reps", type=int, help="repetitions per population")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument(
        "--epsilon", type=float, help="knapsack approximation slack"
    )
    parser.add_argument("--out", help="output CSV path")
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="log run progress"
    )
    return parser


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    kwargs = load_config_file(args.config) if args.config else {}
    if args.scenario:
        kwargs["scenario"] = args.scenario
    if args.strategy:
        kwargs["strategy"] = args.strategy
    if args.agents:
        kwargs["population_sizes"] = _parse_populations(args.agents)
    if args.steps is not None:
        kwargs["steps"] = args.steps
    if args.reps is not None:
        kwargs["repetitions"] = args.reps
    if args.seed is not None:
        kwargs["seed"] = args.seed
    if args.epsilon is not None:
        kwargs["epsilon"] = args.epsilon
    if args.out:
        kwargs["out"] = args.out
    return ExperimentConfig(**kwargs)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = build_config(args)
        log.info(
            "running %s/%s populations=%s steps=%d reps=%d seed=%d",
            cfg.scenario, cfg.strategy, cfg.population_sizes, cfg.steps,
            cfg.repetitions, cfg.seed,
        )
        rows = sweep(cfg)
        write_results(rows, cfg.out)
    except (ContractViolation, DataError) as exc:
        print(f"contribsim: error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {len(rows)} rows to {cfg.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
