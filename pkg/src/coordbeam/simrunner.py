"""Monte-Carlo experiment harness: trials, sweeps, aggregation and CSV output."""
from __future__ import annotations

import csv
import dataclasses
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .channel import draw_channel
from .codebook import Codebook, build_codebook
from .linkeval import RateRecord, evaluate_sinr
from .scenario import (DegenerateGeometry, ErrorModel, ScenarioConfig,
                       angles_from_positions, build_beliefs, sample_scenario)
from .selection import Strategy, select_all

log = logging.getLogger(__name__)

SWEEP_VARIABLES = ("cluster_radius", "error_radius_less_informed", "error_radius_all")
CSV_HEADER = ["strategy", "sweep_variable", "sweep_value", "mean_rate_per_ue",
              "std_err", "trials"]
MAX_SCENARIO_RETRIES = 100

PROFILES = {
    "strong_los": (0.6, 0.2, 0.2),
    "blockage": (0.0, 0.6, 0.4),
}

# Per-trial stream ids; selection streams carry their own tag.
_GEOMETRY, _BELIEFS, _CHANNELS = 0, 1, 2


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    strategies: tuple[Strategy, ...] = tuple(Strategy)
    sweep_variable: str = "cluster_radius"
    sweep_values: tuple[float, ...] = (7.0,)
    # default radius of every node estimate, one entry per observer
    error_radii: tuple[float, ...] | None = None
    bs_position_known: bool = True
    trials: int = 10000
    monte_carlo_iterations: int = 64
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "strategies", tuple(Strategy(s) for s in self.strategies))
        object.__setattr__(self, "sweep_values", tuple(float(v) for v in self.sweep_values))
        k = self.scenario.num_ues
        radii = (0.0,) * k if self.error_radii is None else tuple(map(float, self.error_radii))
        object.__setattr__(self, "error_radii", radii)
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.strategies:
            raise ValueError("at least one strategy is required")
        if self.sweep_variable not in SWEEP_VARIABLES:
            raise ValueError(f"sweep_variable must be one of {SWEEP_VARIABLES}")
        if any(v < 0 for v in self.sweep_values):
            raise ValueError("sweep values must be >= 0")
        if len(radii) != k or any(r < 0 for r in radii):
            raise ValueError(f"error_radii needs {k} nonnegative entries")
        if self.monte_carlo_iterations < 1:
            raise ValueError("monte_carlo_iterations must be positive")

    def resolve(self, sweep_value: float) -> tuple[ScenarioConfig, ErrorModel]:
        """Scenario and error model at one sweep point."""
        scen, radii = self.scenario, list(self.error_radii)
        if self.sweep_variable == "cluster_radius":
            scen = dataclasses.replace(scen, cluster_radius=sweep_value)
        elif self.sweep_variable == "error_radius_less_informed":
            radii[1:] = [sweep_value] * (len(radii) - 1)
        else:
            radii = [sweep_value] * len(radii)
        em = ErrorModel.per_observer(radii, scen.num_paths, self.bs_position_known)
        return scen, em


@dataclass(frozen=True)
class ResultRecord:
    strategy: Strategy
    sweep_variable: str
    sweep_value: float
    mean_rate_per_ue: float
    std_err: float
    trials: int
    wall_time: float = 0.0

    def csv_row(self) -> list[str]:
        return [self.strategy.value, self.sweep_variable, repr(self.sweep_value),
                repr(self.mean_rate_per_ue), repr(self.std_err), str(self.trials)]


def preset(name: str, **overrides) -> ExperimentConfig:
    """``paper``: 64 antennas/beams, 10000 trials. ``desk``: 16/16, 500 trials."""
    if name == "paper":
        scen = ScenarioConfig()
        cfg = ExperimentConfig(scenario=scen, trials=10000, monte_carlo_iterations=64)
    elif name == "desk":
        scen = ScenarioConfig(n_ue=16, n_bs=16, m_ue=16, m_bs=16)
        cfg = ExperimentConfig(scenario=scen, trials=500, monte_carlo_iterations=32)
    else:
        raise ValueError(f"unknown preset {name!r}")
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


@lru_cache(maxsize=16)
def _codebook(m: int, n: int, side: str) -> Codebook:
    return build_codebook(m, n, side)


def _stream(seed: int, key: tuple[int, ...], stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key + (stream,)))


def run_trial(cfg: ExperimentConfig, sweep_value: float, strategy: Strategy,
              trial: int) -> RateRecord | None:
    """One full pass: geometry, beliefs, selection, channels, SINR.

    Returns None when no non-degenerate geometry was found.
    """
    strategy = Strategy(strategy)
    scen, em = cfg.resolve(sweep_value)
    cb_ue = _codebook(scen.m_ue, scen.n_ue, "UE")
    cb_bs = _codebook(scen.m_bs, scen.n_bs, "BS")
    for attempt in range(MAX_SCENARIO_RETRIES):
        key = (trial, attempt)
        try:
            truth = sample_scenario(scen, _stream(cfg.seed, key, _GEOMETRY))
            for p in truth:
                angles_from_positions(p)
            beliefs = build_beliefs(truth, em, _stream(cfg.seed, key, _BELIEFS))
            assignment = select_all(beliefs, scen, cb_ue, cb_bs, strategy,
                                    cfg.monte_carlo_iterations, cfg.seed, key)
        except DegenerateGeometry:
            continue
        rng = _stream(cfg.seed, key, _CHANNELS)
        channels = [draw_channel(p, scen.profile, scen.n_bs, scen.n_ue, rng) for p in truth]
        return evaluate_sinr(channels, assignment, cb_ue, cb_bs, scen.noise_power)
    log.warning("trial %d skipped: degenerate geometry after %d retries",
                trial, MAX_SCENARIO_RETRIES)
    return None


def _trial_means(cfg: ExperimentConfig, sweep_value: float, strategy: Strategy,
                 trials: range) -> np.ndarray:
    """Per-trial mean rate per UE (NaN for skipped trials)."""
    out = np.full(len(trials), np.nan)
    for i, t in enumerate(trials):
        rec = run_trial(cfg, sweep_value, strategy, t)
        if rec is not None:
            out[i] = rec.rates.mean()
    return out


def _chunks(n: int, parts: int) -> list[range]:
    bounds = np.linspace(0, n, parts + 1).astype(int)
    return [range(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def collect_trials(cfg: ExperimentConfig, sweep_value: float, strategy: Strategy,
                   pool: ProcessPoolExecutor | None = None, workers: int = 1) -> np.ndarray:
    """Per-trial rates ordered by trial index, independent of the worker count."""
    if pool is None:
        return _trial_means(cfg, sweep_value, strategy, range(cfg.trials))
    parts = _chunks(cfg.trials, 4 * workers)
    futures = [pool.submit(_trial_means, cfg, sweep_value, strategy, r) for r in parts]
    return np.concatenate([f.result() for f in futures])


def summarize(per_trial: np.ndarray) -> tuple[float, float, int]:
    """Mean, standard error and number of non-skipped trials."""
    x = per_trial[~np.isnan(per_trial)]
    n = x.size
    if n == 0:
        return float("nan"), float("nan"), 0
    se = float(x.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return float(x.mean()), se, n


def run_experiment(cfg: ExperimentConfig, out: str | None = None,
                   workers: int = 1) -> list[ResultRecord]:
    """Mean rate per UE for every (sweep value, strategy); optionally written as CSV.

    Rows are written and flushed as soon as each one is complete.
    """
    fh = writer = None
    if out is not None:
        try:
            fh = open(out, "w", newline="", encoding="ascii")
        except OSError as exc:
            raise OSError(f"cannot write results to {out}: {exc}") from exc
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    records = []
    try:
        for value in cfg.sweep_values:
            for strategy in cfg.strategies:
                start = time.perf_counter()
                per_trial = collect_trials(cfg, value, strategy, pool, workers)
                mean, se, n = summarize(per_trial)
                rec = ResultRecord(strategy, cfg.sweep_variable, value, mean, se, n,
                                   time.perf_counter() - start)
                records.append(rec)
                log.info("%s %s=%g: %.4f +- %.4f (%d trials, %.1fs)", strategy.value,
                         cfg.sweep_variable, value, mean, se, n, rec.wall_time)
                if writer is not None:
                    try:
                        writer.writerow(rec.csv_row())
                        fh.flush()
                    except OSError as exc:
                        raise OSError(f"cannot write results to {out}: {exc}") from exc
    finally:
        if pool is not None:
            pool.shutdown()
        if fh is not None:
            fh.close()
    return records
