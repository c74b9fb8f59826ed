"""``ctcost`` command line: run one experiment and write its CSV and summary."""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .errors import CtcostError, InvalidInputError
from .experiments import EXPERIMENTS, make_config, run

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 2, 3


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="ctcost",
        description="Reproduce counterdiabatic-cost experiments as CSV tables.",
    )
    ap.add_argument("experiment", choices=EXPERIMENTS)
    ap.add_argument("--config", help="JSON file whose keys mirror the flags")
    ap.add_argument("--out", help="output directory (default: current directory)")
    ap.add_argument("--steps", type=int, help="time-grid / integrator steps")
    ap.add_argument("--duration", type=float, help="ramp duration t1 - t0 (hbar = 1 units)")
    ap.add_argument("--durations", type=_float_list, help="duration sweep for lz-benefit / lz-cost-scaling")
    ap.add_argument("--beta-list", type=_float_list, help="inverse temperatures, e.g. 0,1,inf")
    ap.add_argument("--sizes", type=_int_list, help="spin counts L (Ising) or N (LMG)")
    ap.add_argument("--norm-exponent", type=int, help="exponent n of the cost functional")
    ap.add_argument("--workers", type=int, help="worker threads for sweep points")
    return ap


def _load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidInputError("config file must contain a JSON object")
    return data


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    flags = {
        "steps": args.steps,
        "duration": args.duration,
        "durations": args.durations,
        "beta_list": args.beta_list,
        "sizes": args.sizes,
        "norm_exponent": args.norm_exponent,
        "workers": args.workers,
    }
    try:
        file_params = _load_config(args.config) if args.config else {}
        out = args.out or file_params.get("out") or "."
        config = make_config(args.experiment, file_params, flags)
    except InvalidInputError as exc:
        print(f"ctcost: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        paths = run(config, out)
    except InvalidInputError as exc:
        print(f"ctcost: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CtcostError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"ctcost: numerical failure in {args.experiment}: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return EXIT_NUMERICAL
    for p in paths:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
