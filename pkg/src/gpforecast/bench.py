"""Batch benchmarking: CSV ingestion, per-series runs, aggregate report.

Two CSV layouts are supported:

    long  header with series/step/value columns; one observation per row;
          steps are integer indices, unique per series, any order
    wide  one column per series, one step per row; shorter series end with
          empty trailing cells

Each series is split into a training part and a test part of the
configured length, standardized on the training part, forecast with the
GP pipeline, and scored in standardized units (original units optional).
Per-series failures (constant series, too-short series, numerical
breakdown) are recorded and reported; they never abort the batch and are
never silently dropped.

Scores, medians, and failure lists are bit-stable across parallelism
degrees; wall-clock timing fields are measurements and naturally vary.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .forecasting import (
    MONTHLY,
    QUARTERLY,
    Forecast,
    TimeSeries,
    standardized_posterior,
)
from .metrics import ScoreReport, score
from .priors import PriorSpec
from .training import TrainConfig

__all__ = [
    "CsvFormatError",
    "CsvLayout",
    "SeriesEntry",
    "Dataset",
    "SeriesScore",
    "SeriesFailure",
    "BenchReport",
    "load_csv",
    "write_csv",
    "seasonal_naive",
    "run_benchmark",
    "emit_report",
    "parse_machine_report",
]


class CsvFormatError(ValueError):
    """Malformed benchmark CSV; the message names the offending line."""


@dataclass(frozen=True)
class CsvLayout:
    """How to read a dataset file.

    ``test_length=None`` picks the conventional split for the frequency
    (18 monthly steps, 8 quarterly); other frequencies must set it.
    """

    layout: str = "long"
    steps_per_year: float = MONTHLY
    test_length: int | None = None
    series_col: str = "series"
    step_col: str = "step"
    value_col: str = "value"

    def __post_init__(self) -> None:
        if self.layout not in ("long", "wide"):
            raise ValueError(f"layout must be 'long' or 'wide', got {self.layout!r}")
        if not np.isfinite(self.steps_per_year) or self.steps_per_year <= 0:
            raise ValueError(f"steps_per_year must be finite and > 0, got {self.steps_per_year!r}")
        if self.test_length is not None and self.test_length < 1:
            raise ValueError(f"test_length must be >= 1, got {self.test_length}")

    def resolved_test_length(self) -> int:
        if self.test_length is not None:
            return self.test_length
        if self.steps_per_year == MONTHLY:
            return 18
        if self.steps_per_year == QUARTERLY:
            return 8
        raise ValueError(f"no default test length for {self.steps_per_year} steps/year; set test_length")


@dataclass(frozen=True)
class SeriesEntry:
    name: str
    series: TimeSeries
    test_length: int


@dataclass(frozen=True)
class Dataset:
    entries: tuple[SeriesEntry, ...]

    def __post_init__(self) -> None:
        names = [e.name for e in self.entries]
        if len(set(names)) != len(names):
            raise ValueError("series names must be unique")
        for e in self.entries:
            if e.test_length < 1:
                raise ValueError(f"series {e.name!r}: test length must be >= 1")

    def __len__(self) -> int:
        return len(self.entries)


def load_csv(path, layout: CsvLayout) -> Dataset:
    """Parse a dataset file; raises :class:`CsvFormatError` with line numbers."""
    if layout.layout == "long":
        per_series = _read_long(path, layout)
    else:
        per_series = _read_wide(path, layout)
    test_length = layout.resolved_test_length()
    entries = tuple(
        SeriesEntry(
            name=name,
            series=TimeSeries(values=np.array(values, dtype=float), steps_per_year=layout.steps_per_year),
            test_length=test_length,
        )
        for name, values in per_series
    )
    return Dataset(entries=entries)


def _read_long(path, layout: CsvLayout) -> list[tuple[str, list[float]]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        try:
            s_idx = header.index(layout.series_col)
            t_idx = header.index(layout.step_col)
            v_idx = header.index(layout.value_col)
        except ValueError:
            raise CsvFormatError(
                f"{path}: line 1: header must contain columns "
                f"{layout.series_col!r}, {layout.step_col!r}, {layout.value_col!r}; got {header}"
            ) from None
        rows: dict[str, dict[int, float]] = {}
        order: list[str] = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) <= max(s_idx, t_idx, v_idx):
                raise CsvFormatError(f"{path}: line {lineno}: expected {len(header)} columns, got {len(row)}")
            name = row[s_idx].strip()
            if not name:
                raise CsvFormatError(f"{path}: line {lineno}: empty series id")
            try:
                step = int(row[t_idx].strip())
            except ValueError:
                raise CsvFormatError(
                    f"{path}: line {lineno}: step {row[t_idx]!r} is not an integer"
                ) from None
            try:
                value = float(row[v_idx].strip())
            except ValueError:
                raise CsvFormatError(
                    f"{path}: line {lineno}: value {row[v_idx]!r} is not numeric"
                ) from None
            if not np.isfinite(value):
                raise CsvFormatError(f"{path}: line {lineno}: value {value!r} is not finite")
            if name not in rows:
                rows[name] = {}
                order.append(name)
            if step in rows[name]:
                raise CsvFormatError(f"{path}: line {lineno}: duplicate step {step} for series {name!r}")
            rows[name][step] = value
    return [(name, [rows[name][k] for k in sorted(rows[name])]) for name in order]


def _read_wide(path, layout: CsvLayout) -> list[tuple[str, list[float]]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise CsvFormatError(f"{path}: file is empty") from None
        if any(not h for h in header):
            raise CsvFormatError(f"{path}: line 1: empty series name in header")
        if len(set(header)) != len(header):
            raise CsvFormatError(f"{path}: line 1: duplicate series names in header")
        columns: list[list[float]] = [[] for _ in header]
        ended = [False] * len(header)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) > len(header):
                raise CsvFormatError(f"{path}: line {lineno}: more cells than header columns")
            for j, name in enumerate(header):
                cell = row[j].strip() if j < len(row) else ""
                if not cell:
                    ended[j] = True
                    continue
                if ended[j]:
                    raise CsvFormatError(
                        f"{path}: line {lineno}: series {name!r} resumes after a gap; "
                        "empty cells are only allowed at the end of a column"
                    )
                try:
                    value = float(cell)
                except ValueError:
                    raise CsvFormatError(f"{path}: line {lineno}: value {cell!r} is not numeric") from None
                if not np.isfinite(value):
                    raise CsvFormatError(f"{path}: line {lineno}: value {value!r} is not finite")
                columns[j].append(value)
    return [(name, col) for name, col in zip(header, columns)]


def write_csv(dataset: Dataset, path, layout: CsvLayout | None = None) -> None:
    """Write a dataset in long format with full float precision."""
    layout = layout if layout is not None else CsvLayout()
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([layout.series_col, layout.step_col, layout.value_col])
        for entry in dataset.entries:
            for step, value in enumerate(entry.series.values):
                writer.writerow([entry.name, step, repr(float(value))])


def seasonal_naive(ts: TimeSeries, horizon: int, season_length: int | None = None) -> Forecast:
    """Repeat the last observed season; variance from in-sample residuals.

    The per-step variance is the mean squared one-season-back residual on
    the training data (floored at 1e-12 so exactly periodic input still
    yields a valid distribution).
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    season = season_length if season_length is not None else int(round(ts.steps_per_year))
    if season < 1:
        raise ValueError(f"season length must be >= 1, got {season}")
    n = len(ts)
    if n < season:
        raise ValueError(f"series of length {n} is shorter than one season ({season})")
    values = ts.values
    mean = np.array([values[n - season + (h % season)] for h in range(horizon)])
    residuals = values[season:] - values[:-season]
    variance = float(np.mean(residuals**2)) if residuals.size else 0.0
    variance = max(variance, 1e-12)
    return Forecast(horizon=horizon, mean=mean, variance=np.full(horizon, variance))


@dataclass(frozen=True)
class SeriesScore:
    name: str
    report: ScoreReport
    train_seconds: float
    converged: bool


@dataclass(frozen=True)
class SeriesFailure:
    name: str
    reason: str


@dataclass(frozen=True)
class BenchReport:
    """Scores for every series that ran, failures for every one that did not.

    ``count(scores) + count(failures)`` always equals the input series
    count.  Medians cover only the scored series; ``None`` when nothing
    scored.
    """

    scores: tuple[SeriesScore, ...]
    failures: tuple[SeriesFailure, ...]
    median_mae: float | None
    median_crps: float | None
    median_ll: float | None
    total_seconds: float

    def deterministic_view(self) -> dict:
        """Everything in the report except wall-clock timing."""
        return {
            "scores": [(s.name, s.report.mae, s.report.crps, s.report.ll, s.converged) for s in self.scores],
            "failures": [(f.name, f.reason) for f in self.failures],
            "medians": (self.median_mae, self.median_crps, self.median_ll),
        }


def _score_one(
    entry: SeriesEntry,
    mode: str,
    config: TrainConfig | None,
    priors: PriorSpec | None,
    standardized_units: bool,
) -> SeriesScore | SeriesFailure:
    try:
        n = len(entry.series)
        if entry.test_length >= n:
            raise ValueError(f"test length {entry.test_length} leaves no training data (length {n})")
        train_values = entry.series.values[: n - entry.test_length]
        actual = entry.series.values[n - entry.test_length :]
        train_ts = TimeSeries(values=train_values, steps_per_year=entry.series.steps_per_year)
        posterior, standardizer, result = standardized_posterior(
            train_ts, entry.test_length, config=config, mode=mode, priors=priors
        )
        if standardized_units:
            report = score(standardizer.transform(actual), posterior.mean, posterior.observation_variance)
        else:
            report = score(
                actual,
                standardizer.inverse(posterior.mean),
                standardizer.inverse_variance(posterior.observation_variance),
            )
        return SeriesScore(
            name=entry.name, report=report, train_seconds=result.seconds, converged=result.converged
        )
    except Exception as exc:  # per-series robustness: record, never abort the batch
        return SeriesFailure(name=entry.name, reason=f"{type(exc).__name__}: {exc}")


def run_benchmark(
    dataset: Dataset,
    mode: str = "single-seasonal",
    config: TrainConfig | None = None,
    parallelism: int = 1,
    priors: PriorSpec | None = None,
    standardized_units: bool = True,
) -> BenchReport:
    """Forecast and score every series; aggregate medians over the scored ones.

    Results are joined in input order, so the report content (other than
    timing) does not depend on ``parallelism``.
    """
    if parallelism < 1:
        raise ValueError(f"parallelism must be >= 1, got {parallelism}")
    started = time.perf_counter()

    def worker(entry: SeriesEntry):
        return _score_one(entry, mode, config, priors, standardized_units)

    if parallelism == 1 or len(dataset) <= 1:
        outcomes = [worker(entry) for entry in dataset.entries]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            outcomes = list(pool.map(worker, dataset.entries))

    scores = tuple(o for o in outcomes if isinstance(o, SeriesScore))
    failures = tuple(o for o in outcomes if isinstance(o, SeriesFailure))
    if scores:
        median_mae = float(np.median([s.report.mae for s in scores]))
        median_crps = float(np.median([s.report.crps for s in scores]))
        median_ll = float(np.median([s.report.ll for s in scores]))
    else:
        median_mae = median_crps = median_ll = None
    return BenchReport(
        scores=scores,
        failures=failures,
        median_mae=median_mae,
        median_crps=median_crps,
        median_ll=median_ll,
        total_seconds=time.perf_counter() - started,
    )


def emit_report(report: BenchReport, fmt: str = "human") -> str:
    """Render a report as a fixed-column table or as JSON lines."""
    if fmt == "human":
        return _emit_human(report)
    if fmt == "machine":
        return _emit_machine(report)
    raise ValueError(f"format must be 'human' or 'machine', got {fmt!r}")


def _emit_human(report: BenchReport) -> str:
    lines: list[str] = []
    header = f"{'series':<16} {'mae':>9} {'crps':>9} {'ll':>10} {'train_s':>8} {'converged':>9}"
    lines.append(header)
    lines.append("-" * len(header))
    for s in report.scores:
        lines.append(
            f"{s.name:<16} {s.report.mae:>9.4f} {s.report.crps:>9.4f} {s.report.ll:>10.4f} "
            f"{s.train_seconds:>8.3f} {'yes' if s.converged else 'no':>9}"
        )
    if report.failures:
        lines.append("")
        lines.append("failures:")
        for f in report.failures:
            lines.append(f"  {f.name}: {f.reason}")
    lines.append("")
    lines.append(f"aggregate: scored={len(report.scores)} failed={len(report.failures)}")
    if report.scores:
        lines.append(f"  median_mae  {report.median_mae:.4f}")
        lines.append(f"  median_crps {report.median_crps:.4f}")
        lines.append(f"  median_ll   {report.median_ll:.4f}")
    else:
        lines.append("  no series scored")
    lines.append(f"  total_seconds {report.total_seconds:.3f}")
    return "\n".join(lines) + "\n"


def _emit_machine(report: BenchReport) -> str:
    lines = []
    for s in report.scores:
        lines.append(
            json.dumps(
                {
                    "record": "series",
                    "series": s.name,
                    "mae": s.report.mae,
                    "crps": s.report.crps,
                    "ll": s.report.ll,
                    "train_seconds": s.train_seconds,
                    "converged": s.converged,
                }
            )
        )
    for f in report.failures:
        lines.append(json.dumps({"record": "failure", "series": f.name, "reason": f.reason}))
    lines.append(
        json.dumps(
            {
                "record": "aggregate",
                "scored": len(report.scores),
                "failed": len(report.failures),
                "median_mae": report.median_mae,
                "median_crps": report.median_crps,
                "median_ll": report.median_ll,
                "total_seconds": report.total_seconds,
            }
        )
    )
    return "\n".join(lines) + "\n"


def parse_machine_report(text: str) -> dict:
    """Parse machine-format output back into records (round-trip safe)."""
    series: list[dict] = []
    failures: list[dict] = []
    aggregate: dict | None = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"machine report line {lineno}: {exc}") from None
        kind = record.get("record")
        if kind == "series":
            series.append(record)
        elif kind == "failure":
            failures.append(record)
        elif kind == "aggregate":
            aggregate = record
        else:
            raise ValueError(f"machine report line {lineno}: unknown record type {kind!r}")
    if aggregate is None:
        raise ValueError("machine report has no aggregate record")
    return {"series": series, "failures": failures, "aggregate": aggregate}
