"""Command-line driver: pool / select / trial / sweep / report.

All experiment subcommands read an INI config (see configs/) and accept
flag overrides; ``--seed`` overrides the master seed everywhere.  Exit
code is 0 on success and 1 on validation or I/O failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import fileio, harness
from .harness import RunConfig, aggregate, emit_results, read_results, run_trial, sweep
from .selection import build_pool, greedy_select, max_pairwise_correlation, random_select


def _add_config_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="INI experiment config")
    parser.add_argument("--seed", type=int, help="override run.master_seed")
    parser.add_argument("--trp-count", type=int, help="override trp.trp_count")
    parser.add_argument("--group-size", type=int, help="override bdris.group_size")
    parser.add_argument("--pool-size", type=int, help="override trp.pool_size")
    parser.add_argument("--noise-dbm", type=float,
                        help="override channel.noise_power_dbm (omit key for noiseless)")
    parser.add_argument("--scheme", choices=harness.SELECTION_SCHEMES,
                        help="override trp.selection_scheme")
    parser.add_argument("--trials", type=int, help="override run.monte_carlo_trials")


def _overrides_from(args) -> dict:
    pairs = {
        "run.master_seed": args.seed,
        "trp.trp_count": args.trp_count,
        "bdris.group_size": args.group_size,
        "trp.pool_size": args.pool_size,
        "channel.noise_power_dbm": args.noise_dbm,
        "trp.selection_scheme": args.scheme,
        "run.monte_carlo_trials": args.trials,
    }
    return {k: v for k, v in pairs.items() if v is not None}


def _load_config(args) -> RunConfig:
    return fileio.load_run_config(args.config, overrides=_overrides_from(args))


def _cmd_pool(args) -> int:
    cfg = _load_config(args)
    rng = np.random.default_rng(np.random.SeedSequence((cfg.master_seed, 0)))
    pool = build_pool(cfg.bdris, cfg.effective_pool_size, rng)
    fileio.save_pool(pool, cfg.bdris, args.out)
    print(f"wrote pool of {pool.pool_size} TRPs (length {pool.matrix.shape[1]}) to {args.out}")
    return 0


def _cmd_select(args) -> int:
    pool, config = fileio.load_pool(args.pool)
    if args.scheme == "random":
        trps = random_select(pool, args.count, np.random.default_rng(args.seed or 0))
    else:
        trps = greedy_select(pool, args.count)
    fileio.save_trp_set(trps, config, args.out)
    print(f"selected {len(trps)} TRPs ({args.scheme}); "
          f"max pairwise |corr| = {max_pairwise_correlation(trps):.4f}; wrote {args.out}")
    return 0


def _cmd_trial(args) -> int:
    cfg = _load_config(args)
    row = run_trial(cfg, args.trial_index)
    print(f"trial {row.trial}: group_size={row.group_size} trp_count={row.trp_count} "
          f"noise_dbm={row.noise_power_dbm} scheme={row.selection_scheme} "
          f"nmse={row.nmse:.6g} ({row.wall_time_seconds:.2f}s)")
    if args.out:
        emit_results([row], args.out)
        print(f"wrote {args.out}")
    return 0


def _parse_axis_values(axis: str, raw: str):
    values = []
    for tok in raw.split(","):
        tok = tok.strip()
        if axis == "noise_power":
            values.append(None if tok.lower() == "none" else float(tok))
        else:
            values.append(int(tok))
    return values


def _cmd_sweep(args) -> int:
    cfg = _load_config(args)
    values = _parse_axis_values(args.axis, args.values)
    schemes = [s.strip() for s in args.schemes.split(",")]
    rows = []
    for scheme in schemes:
        if scheme not in harness.SELECTION_SCHEMES:
            raise ValueError(f"unknown selection scheme {scheme!r}")
        rows.extend(sweep(cfg if cfg.selection_scheme == scheme
                          else fileio.load_run_config(
                              args.config,
                              overrides={**_overrides_from(args), "trp.selection_scheme": scheme}),
                          args.axis, values, workers=args.workers))
    emit_results(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    for entry in aggregate(rows):
        print(f"  N0={entry['group_size']} D={entry['trp_count']} "
              f"noise={entry['noise_power_dbm']} {entry['selection_scheme']}: "
              f"NMSE {entry['nmse_mean']:.4g} +/- {entry['nmse_std']:.2g} "
              f"({entry['trials']} trials)")
    return 0


def _cmd_report(args) -> int:
    rows = read_results(args.input)
    entries = aggregate(rows)
    header = f"{'group_size':>10} {'trp_count':>9} {'noise_dbm':>10} {'scheme':>7} " \
             f"{'trials':>6} {'nmse_mean':>12} {'nmse_std':>12}"
    print(header)
    for e in entries:
        noise = "none" if e["noise_power_dbm"] is None else f"{e['noise_power_dbm']:g}"
        print(f"{e['group_size']:>10} {e['trp_count']:>9} {noise:>10} "
              f"{e['selection_scheme']:>7} {e['trials']:>6} "
              f"{e['nmse_mean']:>12.6g} {e['nmse_std']:>12.6g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bdrisce",
                                     description="BD-RIS power-measurement channel estimation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pool", help="build and save a candidate TRP pool")
    _add_config_arguments(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_pool)

    p = sub.add_parser("select", help="select TRPs from a saved pool")
    p.add_argument("--pool", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--scheme", choices=harness.SELECTION_SCHEMES, default="greedy")
    p.add_argument("--seed", type=int, help="seed for random selection")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("trial", help="run a single estimation trial")
    _add_config_arguments(p)
    p.add_argument("--trial-index", type=int, default=0)
    p.add_argument("--out", help="optional CSV output path")
    p.set_defaults(func=_cmd_trial)

    p = sub.add_parser("sweep", help="Monte Carlo sweep along one axis")
    _add_config_arguments(p)
    p.add_argument("--axis", choices=harness.SWEEP_AXES, required=True)
    p.add_argument("--values", required=True,
                   help="comma-separated axis values ('none' = noiseless)")
    p.add_argument("--schemes", default="greedy",
                   help="comma-separated selection schemes to run")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("report", help="aggregate a results CSV to mean +/- std")
    p.add_argument("--input", required=True)
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
