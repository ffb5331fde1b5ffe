"""Command-line front end: rate sweeps, gap reports, Monte Carlo runs.

Three subcommands:
  rates     evaluate the closed-form exchange rates over an snr sweep
            and emit plot-ready CSV or JSON
  gap       summarize worst-case gaps between bound and strategies
  simulate  run a seeded Monte Carlo campaign and emit the result JSON

SNR is entered in dB and converted once; all internal math is linear.
Every command prints its fully materialized configuration as one JSON
line on stderr, so any output can be reproduced from the logs alone.
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys
from typing import Sequence

import numpy as np

from .rates import SnrPoint, curve_point, gap_report, linear_to_db
from .sim import ConfigError, SimConfig, run_trials

RATES_SCHEMA = "starlat.rates/1"
RESULT_SCHEMA = "starlat.result/1"

CSV_COLUMNS = ("snr_db", "snr_linear", "ub", "ub_delta1", "df", "df_delta1",
               "af", "lattice", "lattice_delta1", "best", "gap_lattice", "gap_best")

SPACINGS = ("linear-db", "log-linear")


def sweep_grid(start_db: float, stop_db: float, points: int,
               spacing: str) -> list[tuple[float, float]]:
    """(db, linear) pairs for a sweep.

    linear-db spaces uniformly in dB; log-linear spaces geometrically in
    linear snr.  The two coincide up to float rounding, but both names
    are accepted so scripts can say what they mean.
    """
    if points < 1:
        raise ValueError(f"points must be >= 1, got {points}")
    if start_db > stop_db:
        raise ValueError(f"sweep start {start_db} dB exceeds stop {stop_db} dB")
    if spacing == "linear-db":
        dbs = np.linspace(start_db, stop_db, points)
        return [(float(db), 10.0 ** (float(db) / 10.0)) for db in dbs]
    if spacing == "log-linear":
        linears = np.geomspace(10.0 ** (start_db / 10.0), 10.0 ** (stop_db / 10.0), points)
        return [(linear_to_db(float(s)), float(s)) for s in linears]
    raise ValueError(f"unknown spacing {spacing!r}")


def _row(db: float, linear: float) -> dict:
    p = curve_point(linear)
    return {
        "snr_db": db,
        "snr_linear": linear,
        "ub": p.ub,
        "ub_delta1": p.ub_split.delta1,
        "df": p.df,
        "df_delta1": p.df_split.delta1,
        "af": p.af,
        "lattice": p.lattice,
        "lattice_delta1": p.lattice_split.delta1,
        "best": p.best_of_three,
        "gap_lattice": p.gap_lattice,
        "gap_best": p.gap_best,
    }


def _open_out(path: str):
    """Returns (stream, needs_close)."""
    if path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8"), True


def _print_config(command: str, payload: dict) -> None:
    print(json.dumps({"command": command, **payload}), file=sys.stderr)


def cmd_rates(args) -> int:
    grid = sweep_grid(args.snr_db_start, args.snr_db_stop, args.points, args.spacing)
    _print_config("rates", {
        "snr_db_start": args.snr_db_start, "snr_db_stop": args.snr_db_stop,
        "points": args.points, "spacing": args.spacing,
        "format": args.format, "out": args.out,
    })
    rows = [_row(db, lin) for db, lin in grid]
    stream, close = _open_out(args.out)
    try:
        if args.format == "csv":
            stream.write(f"# schema: {RATES_SCHEMA}\n")
            stream.write(",".join(CSV_COLUMNS) + "\n")
            for row in rows:
                stream.write(",".join(repr(row[c]) for c in CSV_COLUMNS) + "\n")
        else:
            json.dump({"schema": RATES_SCHEMA, "points": rows}, stream, indent=2)
            stream.write("\n")
    finally:
        if close:
            stream.close()
    return 0


def cmd_gap(args) -> int:
    grid = sweep_grid(args.snr_db_start, args.snr_db_stop, args.points, args.spacing)
    _print_config("gap", {
        "snr_db_start": args.snr_db_start, "snr_db_stop": args.snr_db_stop,
        "points": args.points, "spacing": args.spacing,
    })
    summary = gap_report([lin for _, lin in grid])
    print(f"grid: {summary.grid_points} points, "
          f"{args.snr_db_start:g} .. {args.snr_db_stop:g} dB ({args.spacing})")
    print(f"max lattice gap: {summary.max_gap_lattice:.6f} bits "
          f"at snr {summary.argmax_snr_lattice:.6g} "
          f"({linear_to_db(summary.argmax_snr_lattice):.2f} dB)")
    print(f"max best-of-three gap: {summary.max_gap_best:.6f} bits "
          f"at snr {summary.argmax_snr_best:.6g} "
          f"({linear_to_db(summary.argmax_snr_best):.2f} dB)")
    print(f"lattice gap at snr {summary.tail_snr:.6g}: {summary.tail_gap_lattice:.6f} bits")
    print(f"high-snr limit log2(3)/4 = {summary.asymptote:.6f} bits "
          f"(tail sits {summary.asymptote - summary.tail_gap_lattice:.6f} below)")
    return 0


def cmd_simulate(args) -> int:
    seed = secrets.randbits(64) if args.seed is None else args.seed
    cfg = SimConfig(
        strategy=args.strategy,
        snr=SnrPoint.from_db(args.snr_db),
        dim=args.dim,
        trials=args.trials,
        seed=seed,
        margin=args.margin,
        rate_fraction=args.rate_fraction,
        bc_mode=args.bc_mode,
        noiseless=args.noiseless,
        codebook_size=args.codebook_size,
    )
    _print_config("simulate", {
        "strategy": cfg.strategy, "snr_db": args.snr_db,
        "snr_linear": cfg.snr.linear, "dim": cfg.dim, "trials": cfg.trials,
        "seed": cfg.seed, "margin": cfg.margin,
        "rate_fraction": cfg.rate_fraction, "bc_mode": cfg.bc_mode,
        "noiseless": cfg.noiseless, "codebook_size": cfg.codebook_size,
        "workers": args.workers, "out": args.out,
    })
    result = run_trials(cfg, workers=args.workers)
    stream, close = _open_out(args.out)
    try:
        json.dump(result.to_dict(), stream, indent=2)
        stream.write("\n")
    finally:
        if close:
            stream.close()
    return 0


def _add_sweep_args(parser: argparse.ArgumentParser, default_points: int) -> None:
    parser.add_argument("--snr-db-start", type=float, default=-20.0,
                        help="sweep start in dB (default %(default)s)")
    parser.add_argument("--snr-db-stop", type=float, default=40.0,
                        help="sweep stop in dB (default %(default)s)")
    parser.add_argument("--points", type=int, default=default_points,
                        help="grid points (default %(default)s)")
    parser.add_argument("--spacing", choices=SPACINGS, default="linear-db",
                        help="grid spacing (default %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="starlat",
        description="Exchange-rate bounds and Monte Carlo for a three-pair star relay network.")
    sub = parser.add_subparsers(dest="command", required=True)

    rates = sub.add_parser("rates", help="closed-form rate sweep (CSV/JSON)")
    _add_sweep_args(rates, default_points=121)
    rates.add_argument("--format", choices=("csv", "json"), default="csv")
    rates.add_argument("--out", default="-", help="output path, '-' for stdout")
    rates.set_defaults(func=cmd_rates)

    gap = sub.add_parser("gap", help="worst-case gap summary")
    _add_sweep_args(gap, default_points=5000)
    gap.set_defaults(func=cmd_gap)

    simulate = sub.add_parser("simulate", help="Monte Carlo campaign")
    simulate.add_argument("--strategy", required=True, choices=("lattice", "df", "af"))
    simulate.add_argument("--snr-db", type=float, required=True)
    simulate.add_argument("--dim", type=int, required=True,
                          help="lattice: real dimensions; af: complex uses per phase; "
                               "df: total complex uses")
    simulate.add_argument("--trials", type=int, default=10000)
    simulate.add_argument("--seed", type=int, default=None,
                          help="64-bit seed; random (and printed) if omitted")
    simulate.add_argument("--margin", type=float, default=1.0)
    simulate.add_argument("--rate-fraction", type=float, default=0.7)
    simulate.add_argument("--bc-mode", choices=("ideal", "coded"), default="ideal")
    simulate.add_argument("--codebook-size", type=int, default=None,
                          help="pin per-source codebook size instead of sizing from rate")
    simulate.add_argument("--noiseless", action="store_true")
    simulate.add_argument("--workers", type=int, default=1)
    simulate.add_argument("--out", default="-", help="output path, '-' for stdout")
    simulate.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
