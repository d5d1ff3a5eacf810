"""Command-line interface.

    gpforecast forecast INPUT.csv --freq monthly --horizon 18 --output out.csv
    gpforecast bench DATA.csv --freq monthly --parallel 4 --format machine
    gpforecast priors --output priors.txt

Training settings can be overridden with a plain-text config file of
``key = value`` lines (keys: max_iters, grad_tol, objective_tol,
restarts, seed).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import sys

import numpy as np

from .bench import CsvLayout, emit_report, load_csv, run_benchmark
from .forecasting import TimeSeries, default_horizon, forecast, parse_frequency
from .priors import default_priors, format_priors, load_priors
from .training import TrainConfig

_CONFIG_KEYS = {
    "max_iters": int,
    "grad_tol": float,
    "objective_tol": float,
    "restarts": int,
    "seed": int,
}


def load_train_config(path) -> TrainConfig:
    """Parse a key=value config file into a TrainConfig."""
    overrides = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}: line {lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in _CONFIG_KEYS:
                raise ValueError(f"{path}: line {lineno}: unknown setting {key!r} (known: {sorted(_CONFIG_KEYS)})")
            try:
                overrides[key] = _CONFIG_KEYS[key](value.strip())
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: bad value {value.strip()!r} for {key}") from None
    return TrainConfig(**overrides)


def _read_values(path) -> np.ndarray:
    """Read a single-series CSV: bare numbers, or a file with a 'value' column."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and any(cell.strip() for cell in row)]
    if not rows:
        raise ValueError(f"{path}: file is empty")
    first = rows[0]
    value_idx = 0
    start = 0
    try:
        float(first[0])
    except ValueError:
        header = [h.strip() for h in first]
        if "value" not in header:
            raise ValueError(f"{path}: line 1: header must contain a 'value' column, got {header}") from None
        value_idx = header.index("value")
        start = 1
    values = []
    for lineno, row in enumerate(rows[start:], start=start + 1):
        cell = row[value_idx].strip() if value_idx < len(row) else ""
        try:
            values.append(float(cell))
        except ValueError:
            raise ValueError(f"{path}: line {lineno}: value {cell!r} is not numeric") from None
    return np.array(values)


def _cmd_forecast(args) -> int:
    config = load_train_config(args.config) if args.config else TrainConfig()
    priors = load_priors(args.priors) if args.priors else None
    steps_per_year = parse_frequency(args.freq)
    ts = TimeSeries(values=_read_values(args.input), steps_per_year=steps_per_year)
    horizon = args.horizon if args.horizon is not None else default_horizon(ts)
    fc, result = forecast(ts, horizon, config=config, mode=args.mode, priors=priors)
    lines = ["step,mean,variance"]
    n = len(ts)
    for i in range(horizon):
        lines.append(f"{n + i},{float(fc.mean[i])!r},{float(fc.variance[i])!r}")
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if not result.converged:
        print(f"warning: training did not converge ({result.iterations} iterations)", file=sys.stderr)
    return 0


def _cmd_bench(args) -> int:
    config = load_train_config(args.config) if args.config else TrainConfig()
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    priors = load_priors(args.priors) if args.priors else None
    layout = CsvLayout(
        layout=args.layout,
        steps_per_year=parse_frequency(args.freq),
        test_length=args.test_length,
    )
    dataset = load_csv(args.data, layout)
    report = run_benchmark(
        dataset,
        mode=args.mode,
        config=config,
        parallelism=args.parallel,
        priors=priors,
        standardized_units=not args.original_units,
    )
    text = emit_report(report, fmt=args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if report.failures and not args.allow_failures:
        print(f"error: {len(report.failures)} series failed", file=sys.stderr)
        return 1
    return 0


def _cmd_priors(args) -> int:
    priors = load_priors(args.priors) if args.priors else default_priors()
    text = format_priors(priors)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gpforecast", description="GP-based automatic time-series forecasting")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fc = sub.add_parser("forecast", help="forecast one series from a CSV of values")
    p_fc.add_argument("input", help="CSV with one value per row (or a 'value' column)")
    p_fc.add_argument("--freq", required=True, help="monthly, quarterly, or steps per year")
    p_fc.add_argument("--horizon", type=int, default=None, help="steps to forecast (default by frequency)")
    p_fc.add_argument("--mode", default="single-seasonal", choices=["single-seasonal", "double-seasonal"])
    p_fc.add_argument("--output", default=None, help="write forecast CSV here instead of stdout")
    p_fc.add_argument("--config", default=None, help="training config file (key = value)")
    p_fc.add_argument("--priors", default=None, help="alternative priors file")
    p_fc.set_defaults(func=_cmd_forecast)

    p_b = sub.add_parser("bench", help="run the benchmark over a dataset CSV")
    p_b.add_argument("data", help="dataset CSV")
    p_b.add_argument("--layout", default="long", choices=["long", "wide"])
    p_b.add_argument("--freq", required=True, help="monthly, quarterly, or steps per year")
    p_b.add_argument("--test-length", type=int, default=None, dest="test_length")
    p_b.add_argument("--mode", default="single-seasonal", choices=["single-seasonal", "double-seasonal"])
    p_b.add_argument("--parallel", type=int, default=1, help="series-level worker threads")
    p_b.add_argument("--format", default="human", choices=["human", "machine"])
    p_b.add_argument("--seed", type=int, default=None, help="seed for restarts > 1")
    p_b.add_argument("--config", default=None, help="training config file (key = value)")
    p_b.add_argument("--priors", default=None, help="alternative priors file")
    p_b.add_argument("--output", default=None, help="write the report here instead of stdout")
    p_b.add_argument("--allow-failures", action="store_true", help="exit 0 even if some series fail")
    p_b.add_argument(
        "--original-units", action="store_true", help="score in original units instead of standardized"
    )
    p_b.set_defaults(func=_cmd_bench)

    p_p = sub.add_parser("priors", help="print or export the active hyperparameter priors")
    p_p.add_argument("--priors", default=None, help="load this priors file instead of the defaults")
    p_p.add_argument("--output", default=None, help="write here instead of stdout")
    p_p.set_defaults(func=_cmd_priors)

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
