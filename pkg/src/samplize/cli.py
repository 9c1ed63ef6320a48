"""Command-line interface: run experiments, fit scaling laws, calibrate the
copy protocol, and print the (|0>, |+>) showcase.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .errors import ConfigError, SamplizeError
from .estimators import folklore_estimate, query_estimate, samplized_estimate
from .harness import (
    fit_scaling,
    load_config,
    resolve_workers,
    rows_from_csv,
    run_experiment,
    state_to_pairs,
    write_csv,
)
from .samplizer import CalibrationCache, calibrate_rounds, choi_distance, lmr_channel, reflection_channel
from .states import (
    PureState,
    basis_state,
    fidelity_exact,
    haar_random,
    plus_state,
    psi_x,
    trace_distance_exact,
    zero_state,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the CLI contract wants 1.
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="samplize", description=__doc__)
    parser.add_argument("--version", action="version", version=f"samplize {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment sweep from a config file")
    p_run.add_argument("--config", required=True, help="TOML or JSON experiment config")
    p_run.add_argument("--out", help="output CSV path (default: config stem + .csv)")
    p_run.add_argument("--workers", type=int, help="worker threads (default: config, "
                       "then SAMPLIZE_SIM_THREADS, then 1)")
    p_run.add_argument("--no-plot", action="store_true", help="skip the PNG report")

    p_fit = sub.add_parser("fit", help="fit the sample-cost exponent from a results CSV")
    p_fit.add_argument("--in", dest="infile", required=True, help="results CSV from 'run'")
    p_fit.add_argument("--method", required=True, help="method rows to fit")
    p_fit.add_argument("--plot-out", help="PNG path (default: input stem + .fit.png)")
    p_fit.add_argument("--no-plot", action="store_true", help="skip the PNG report")

    p_cal = sub.add_parser("calibrate", help="calibrate copy-protocol rounds for a state")
    p_cal.add_argument("--state", required=True,
                       help="state spec: zero[:N] | plus | one | psi_x:X | haar:N:SEED")
    p_cal.add_argument("--delta", type=float, required=True, help="channel error budget")
    p_cal.add_argument("--controlled", action="store_true", help="calibrate the controlled form")

    sub.add_parser("demo", help="run the (|0>, |+>) showcase")
    return parser


def parse_state_spec(spec: str) -> PureState:
    parts = spec.split(":")
    kind = parts[0]
    try:
        if kind == "zero":
            return zero_state(int(parts[1]) if len(parts) > 1 else 1)
        if kind == "one":
            return basis_state(1, 1)
        if kind == "plus":
            return plus_state()
        if kind == "psi_x":
            return psi_x(float(parts[1]))
        if kind == "haar":
            return haar_random(int(parts[1]), int(parts[2]))
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"malformed state spec {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown state spec {spec!r}")


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    rows = run_experiment(cfg, workers=args.workers)
    out = args.out or os.path.splitext(args.config)[0] + ".csv"
    write_csv(rows, out, cfg)
    n_succ = sum(r.success for r in rows)
    print(f"wrote {len(rows)} rows to {out} ({n_succ}/{len(rows)} successes, "
          f"workers={resolve_workers(args.workers if args.workers is not None else cfg.workers)})")
    if not args.no_plot:
        from .plots import render_run_report

        png = os.path.splitext(out)[0] + ".png"
        render_run_report(rows, png)
        print(f"wrote report figure to {png}")
    return 0


def _cmd_fit(args) -> int:
    rows = rows_from_csv(args.infile)
    fit = fit_scaling(rows, args.method)
    report = {
        "method": args.method,
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "points": [list(p) for p in fit.points],
    }
    print(json.dumps(report, indent=2))
    if not args.no_plot:
        from .plots import render_scaling_plot

        png = args.plot_out or os.path.splitext(args.infile)[0] + f".{args.method}.fit.png"
        render_scaling_plot(fit, args.method, png)
        print(f"wrote scaling figure to {png}", file=sys.stderr)
    return 0


def _cmd_calibrate(args) -> int:
    state = parse_state_spec(args.state)
    cache = CalibrationCache()
    cfg = calibrate_rounds(state, args.delta, controlled=args.controlled, cache=cache)
    channel, _ = lmr_channel(state, cfg)
    exact = reflection_channel(state, controlled=args.controlled)
    print(json.dumps({
        "state": args.state,
        "amplitudes": state_to_pairs(state),
        "delta": args.delta,
        "controlled": args.controlled,
        "rounds": cfg.rounds,
        "delta_step": cfg.delta_step,
        "choi_distance": choi_distance(channel, exact),
    }, indent=2))
    return 0


def _cmd_demo(args) -> int:
    phi, psi = zero_state(), plus_state()
    t_true = trace_distance_exact(phi, psi)
    f_true = fidelity_exact(phi, psi)
    print(f"showcase pair: |0> vs |+>  (T_true = {t_true:.5f}, F_true = {f_true:.5f})")
    fol = folklore_estimate(phi, psi, 0.1, 2024)
    print(f"folklore  eps=0.10: T_hat = {fol.T_hat:.5f}  F_hat = {fol.F_hat:.5f}  "
          f"samples = {fol.ledger.to_json()}")
    qry = query_estimate(phi, psi, 0.1, 0.05, 2024)
    print(f"query     err=0.05: T_hat = {qry.T_hat:.5f}  F_hat = {qry.F_hat:.5f}  "
          f"t = {qry.t}  queries = {qry.queries}  samples = {qry.ledger.to_json()}")
    smp = samplized_estimate(phi, psi, 0.25, 2024)
    print(f"samplized eps=0.25: T_hat = {smp.T_hat:.5f}  F_hat = {smp.F_hat:.5f}  "
          f"t = {smp.t}  rounds/query = {smp.rounds_per_query}  "
          f"samples = {smp.ledger.to_json()}")
    return 0


def cli(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return 0 if exc.code in (0, None) else int(exc.code)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "fit":
            return _cmd_fit(args)
        if args.command == "calibrate":
            return _cmd_calibrate(args)
        return _cmd_demo(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SamplizeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # keep scripts informative without a traceback wall
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
