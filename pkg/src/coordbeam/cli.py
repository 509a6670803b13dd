"""Command-line entry point.

Configuration precedence: preset, then ``--config`` file, then flags.
The config file holds ``key = value`` lines named after the
ExperimentConfig / ScenarioConfig fields; lists are comma separated.
"""
from __future__ import annotations

import argparse
import configparser
import dataclasses
import logging
import sys

from .scenario import ScenarioConfig
from .simrunner import PROFILES, SWEEP_VARIABLES, ExperimentConfig, preset, run_experiment
from .selection import Strategy

_SCENARIO_FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}
_EXPERIMENT_KEYS = {"strategies", "sweep_variable", "sweep_values", "error_radii",
                    "bs_position_known", "trials", "monte_carlo_iterations", "seed"}
_INT_KEYS = {"num_ues", "num_paths", "n_ue", "n_bs", "m_ue", "m_bs", "trials",
             "monte_carlo_iterations", "seed"}
_FLOAT_KEYS = {"cluster_radius", "noise_power"}
_FLOAT_LIST_KEYS = {"cluster_center", "bs_position", "reflector_region",
                    "path_power_profile", "sweep_values", "error_radii"}


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def parse_value(key: str, text: str):
    text = text.strip()
    if key == "path_power_profile" and text in PROFILES:
        return PROFILES[text]
    if key in _INT_KEYS:
        return int(text)
    if key in _FLOAT_KEYS:
        return float(text)
    if key in _FLOAT_LIST_KEYS:
        return _floats(text)
    if key == "strategies":
        return tuple(Strategy(s.strip()) for s in text.split(",") if s.strip())
    if key == "bs_position_known":
        return text.lower() in ("1", "true", "yes", "on")
    return text


def read_config_file(path: str) -> dict:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_string("[experiment]\n" + fh.read(), source=path)
    except OSError as exc:
        raise SystemExit(f"cannot read config {path}: {exc}")
    values = {}
    for key, text in parser["experiment"].items():
        if key not in _SCENARIO_FIELDS and key not in _EXPERIMENT_KEYS:
            raise SystemExit(f"{path}: unknown key {key!r}")
        values[key] = parse_value(key, text)
    return values


def apply_overrides(cfg: ExperimentConfig, values: dict) -> ExperimentConfig:
    scen_kw = {k: v for k, v in values.items() if k in _SCENARIO_FIELDS}
    exp_kw = {k: v for k, v in values.items() if k in _EXPERIMENT_KEYS}
    scen = dataclasses.replace(cfg.scenario, **scen_kw) if scen_kw else cfg.scenario
    if scen.num_ues != cfg.scenario.num_ues and "error_radii" not in exp_kw:
        exp_kw["error_radii"] = None
    return dataclasses.replace(cfg, scenario=scen, **exp_kw)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="coordbeam",
        description="Location-aided coordinated analog beam selection experiments.")
    ap.add_argument("--preset", choices=("paper", "desk"), default="paper")
    ap.add_argument("--config", help="key = value configuration file")
    ap.add_argument("--sweep", choices=SWEEP_VARIABLES, help="sweep variable")
    ap.add_argument("--values", help="comma separated sweep values")
    ap.add_argument("--strategies", help="comma separated subset of "
                    + ",".join(s.value for s in Strategy))
    ap.add_argument("--trials", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--profile", choices=sorted(PROFILES), help="path power profile")
    ap.add_argument("--mc", type=int, help="Monte-Carlo iterations per selection")
    ap.add_argument("--workers", type=int, default=1, help="worker processes")
    ap.add_argument("--out", default="results.csv", help="CSV output path")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    cfg = preset(args.preset)
    if args.config:
        cfg = apply_overrides(cfg, read_config_file(args.config))
    flags = {}
    if args.sweep:
        flags["sweep_variable"] = args.sweep
    if args.values:
        flags["sweep_values"] = _floats(args.values)
    if args.strategies:
        flags["strategies"] = parse_value("strategies", args.strategies)
    if args.trials is not None:
        flags["trials"] = args.trials
    if args.seed is not None:
        flags["seed"] = args.seed
    if args.profile:
        flags["path_power_profile"] = PROFILES[args.profile]
    if args.mc is not None:
        flags["monte_carlo_iterations"] = args.mc
    return apply_overrides(cfg, flags)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s")
    try:
        cfg = config_from_args(args)
    except ValueError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    try:
        records = run_experiment(cfg, args.out, workers=args.workers)
    except OSError as exc:
        print(exc, file=sys.stderr)
        return 1
    for r in records:
        print(f"{r.strategy.value:>14} {r.sweep_variable}={r.sweep_value:g}: "
              f"{r.mean_rate_per_ue:.4f} +- {r.std_err:.4f} bits/s/Hz ({r.trials} trials)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
