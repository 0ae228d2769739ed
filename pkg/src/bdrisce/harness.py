"""Experiment driver: single trials, Monte Carlo sweeps, and CSV results.

One trial draws a channel, builds a candidate pool, selects TRPs, takes
noisy power measurements, trains the estimator, and scores the recovered
autocorrelation against the ground truth by the Frobenius NMSE ratio.
Sweeps repeat trials over an axis (TRP count, noise power, or group
size) with per-trial seeding that keeps channel realizations paired
across axis values and selection schemes, so comparisons isolate the
intended effect.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .bdris import BdRisConfig
from .channel import (AutocorrelationMatrix, SceneGeometry, cascade, dbm_to_watts,
                      draw_channels, measure_power, true_autocorrelation)
from .estimator import TrainConfig, recover_autocorrelation, train
from .selection import build_pool, greedy_select, random_select

SWEEP_AXES = ("trp_count", "noise_power", "group_size")
SELECTION_SCHEMES = ("greedy", "random")
RESULT_FIELDS = ("trial", "group_size", "trp_count", "noise_power_dbm",
                 "selection_scheme", "nmse", "wall_time_seconds")
DEFAULT_POOL_FACTOR = 20


@dataclass(frozen=True)
class RunConfig:
    """Everything one trial needs; sweeps derive variants from it."""

    bdris: BdRisConfig
    scene: SceneGeometry
    trp_count: int
    train: TrainConfig
    fading: str = "los"
    tx_power_watts: float = 1.0
    noise_power_dbm: float | None = None
    pool_size: int | None = None
    selection_scheme: str = "greedy"
    monte_carlo_trials: int = 20
    master_seed: int = 0

    def __post_init__(self):
        if self.trp_count < 2:
            raise ValueError("trp_count must be at least 2")
        if self.selection_scheme not in SELECTION_SCHEMES:
            raise ValueError(f"selection_scheme must be one of {SELECTION_SCHEMES}")
        if self.pool_size is not None and self.pool_size < self.trp_count:
            raise ValueError("pool_size must be at least trp_count")
        if self.monte_carlo_trials < 1:
            raise ValueError("monte_carlo_trials must be positive")
        if self.master_seed < 0:
            raise ValueError("master_seed must be nonnegative")
        if self.tx_power_watts <= 0:
            raise ValueError("tx_power_watts must be positive")
        if self.scene.n_elements != self.bdris.n_elements:
            raise ValueError("scene UPA size and BD-RIS element count differ")

    @property
    def effective_pool_size(self) -> int:
        return self.pool_size if self.pool_size is not None else DEFAULT_POOL_FACTOR * self.trp_count

    @property
    def noise_power_watts(self) -> float:
        return 0.0 if self.noise_power_dbm is None else dbm_to_watts(self.noise_power_dbm)


@dataclass(frozen=True)
class ResultRow:
    trial: int
    group_size: int
    trp_count: int
    noise_power_dbm: float | None
    selection_scheme: str
    nmse: float
    wall_time_seconds: float

    def __post_init__(self):
        if self.nmse < 0:
            raise ValueError("nmse must be nonnegative")


def nmse(estimate: AutocorrelationMatrix, truth: AutocorrelationMatrix) -> float:
    """Frobenius ratio ||estimate - truth||^2 / ||truth||^2."""
    if estimate.entries.shape != truth.entries.shape:
        raise ValueError("matrix dimensions differ")
    denom = float(np.linalg.norm(truth.entries) ** 2)
    if denom == 0.0:
        raise ValueError("truth matrix must be nonzero")
    return float(np.linalg.norm(estimate.entries - truth.entries) ** 2) / denom


def _trial_rngs(cfg: RunConfig, trial_seed: int):
    # Children are keyed only by (master seed, trial); the swept axis value
    # and the selection scheme deliberately do not enter, so trials with the
    # same index share channel realizations, pools, noise draws, and
    # training randomness across sweep points (paired comparisons).
    if trial_seed < 0:
        raise ValueError("trial_seed must be nonnegative")
    ss = np.random.SeedSequence((cfg.master_seed, trial_seed))
    return [np.random.default_rng(child) for child in ss.spawn(4)]


def run_trial(cfg: RunConfig, trial_seed: int) -> ResultRow:
    """Run one end-to-end estimation trial; deterministic in (cfg, seed)."""
    start = time.perf_counter()
    channel_rng, pool_rng, select_rng, noise_rng = _trial_rngs(cfg, trial_seed)

    ch = draw_channels(cfg.scene, cfg.bdris, cfg.fading, channel_rng,
                       tx_power_watts=cfg.tx_power_watts)
    h = cascade(ch, cfg.bdris)
    truth = true_autocorrelation(h)

    pool = build_pool(cfg.bdris, cfg.effective_pool_size, pool_rng)
    if cfg.selection_scheme == "greedy":
        trps = greedy_select(pool, cfg.trp_count)
    else:
        trps = random_select(pool, cfg.trp_count, select_rng)

    sigma2 = cfg.noise_power_watts
    measurements = [measure_power(h, v, sigma2, noise_rng, trp_index=i)
                    for i, v in enumerate(trps.selected)]

    # Trial-local training seed: paired across axis values and schemes, but
    # still responsive to the user-facing train.seed knob.
    trial_train_seed = int(np.random.SeedSequence(
        (cfg.master_seed, trial_seed, cfg.train.seed)).generate_state(1)[0])
    train_cfg = replace(cfg.train, seed=trial_train_seed)
    result = train(trps, measurements, train_cfg)
    estimate = recover_autocorrelation(result.best_weights, result.normalization_factor)

    return ResultRow(trial=trial_seed,
                     group_size=cfg.bdris.group_size,
                     trp_count=cfg.trp_count,
                     noise_power_dbm=cfg.noise_power_dbm,
                     selection_scheme=cfg.selection_scheme,
                     nmse=nmse(estimate, truth),
                     wall_time_seconds=time.perf_counter() - start)


def apply_axis_value(cfg: RunConfig, axis: str, value) -> RunConfig:
    """Derive the trial config for one sweep point; validates the value."""
    if axis == "trp_count":
        count = int(value)
        if count < 2 or count != value:
            raise ValueError(f"invalid trp_count {value!r}")
        return replace(cfg, trp_count=count)
    if axis == "noise_power":
        if value is None:
            return replace(cfg, noise_power_dbm=None)
        return replace(cfg, noise_power_dbm=float(value))
    if axis == "group_size":
        size = int(value)
        if size < 1 or size != value or cfg.bdris.n_elements % size != 0:
            raise ValueError(f"invalid group_size {value!r} for N={cfg.bdris.n_elements}")
        return replace(cfg, bdris=replace(cfg.bdris, group_size=size))
    raise ValueError(f"unknown sweep axis {axis!r}")


def sweep(cfg: RunConfig, axis: str, values, workers: int = 1) -> list[ResultRow]:
    """Run ``monte_carlo_trials`` trials per axis value.

    Rows come back ordered by (axis value position, trial index)
    regardless of worker scheduling.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}")
    values = list(values)
    if not values:
        raise ValueError("values must be nonempty")
    configs = [apply_axis_value(cfg, axis, v) for v in values]
    jobs = [(c, trial) for c in configs for trial in range(cfg.monte_carlo_trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_trial_job, jobs, chunksize=1))
    else:
        rows = [_run_trial_job(job) for job in jobs]
    return rows


def _run_trial_job(job) -> ResultRow:
    cfg, trial = job
    return run_trial(cfg, trial)


def emit_results(rows, path) -> None:
    """Write rows as CSV (UTF-8, LF) with the canonical column order."""
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(RESULT_FIELDS)
            for row in rows:
                writer.writerow([
                    row.trial, row.group_size, row.trp_count,
                    "" if row.noise_power_dbm is None else repr(float(row.noise_power_dbm)),
                    row.selection_scheme,
                    repr(float(row.nmse)),
                    repr(float(row.wall_time_seconds)),
                ])
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def read_results(path) -> list[ResultRow]:
    """Parse a results CSV back into rows (inverse of emit_results)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != RESULT_FIELDS:
            raise ValueError(f"unexpected results header {header!r}")
        rows = []
        for rec in reader:
            rows.append(ResultRow(
                trial=int(rec[0]),
                group_size=int(rec[1]),
                trp_count=int(rec[2]),
                noise_power_dbm=None if rec[3] == "" else float(rec[3]),
                selection_scheme=rec[4],
                nmse=float(rec[5]),
                wall_time_seconds=float(rec[6]),
            ))
    return rows


def aggregate(rows):
    """Group rows by scenario and compute mean/std NMSE per group.

    Returns a list of dicts keyed like the CSV columns, ordered by first
    appearance, with ``trials``, ``nmse_mean`` and ``nmse_std`` added.
    """
    groups: dict[tuple, list[float]] = {}
    for row in rows:
        key = (row.group_size, row.trp_count, row.noise_power_dbm, row.selection_scheme)
        groups.setdefault(key, []).append(row.nmse)
    out = []
    for key, vals in groups.items():
        arr = np.asarray(vals)
        out.append({
            "group_size": key[0], "trp_count": key[1],
            "noise_power_dbm": key[2], "selection_scheme": key[3],
            "trials": arr.size,
            "nmse_mean": float(arr.mean()),
            "nmse_std": float(arr.std(ddof=1)) if arr.size > 1 else 0.0,
        })
    return out
