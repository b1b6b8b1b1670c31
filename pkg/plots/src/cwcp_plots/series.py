"""Series extraction from result CSVs.

This package deliberately shares no code with the library that produces the
CSVs; the column layout is the whole contract.  Coverage files carry

    method,param_b,shift,trial,coverage,width,tau,level

and clip-level-selection files carry

    b,lambda,m,trial,emp_risk,srm_objective,test_l2

Only means, sample standard deviations, and empirical CDFs are computed
here; everything else is rendering.
"""

from __future__ import annotations

import csv
import os
import statistics
from dataclasses import dataclass


class SchemaError(ValueError):
    """Input CSV does not provide the columns a plot kind needs."""


PLOT_KINDS = ("coverage-cdf", "coverage-vs-shift", "srm-curves")


@dataclass(frozen=True)
class PlotJob:
    """One rendering task: input CSV, plot kind, nominal level, output path."""

    csv_path: str
    kind: str
    out_path: str
    nominal: float = 0.8
    dump_path: str | None = None

    def __post_init__(self):
        if self.kind not in PLOT_KINDS:
            raise SchemaError(f"unknown plot kind {self.kind!r}; expected one of {PLOT_KINDS}")
        if not os.path.exists(self.csv_path):
            raise SchemaError(f"input file {self.csv_path!r} does not exist")
        if not 0.0 < self.nominal < 1.0:
            raise SchemaError(f"nominal level must be in (0, 1), got {self.nominal}")


@dataclass(frozen=True)
class Series:
    """One plotted curve: a label, x values, y values, optional sd band."""

    label: str
    x: tuple[float, ...]
    y: tuple[float, ...]
    sd: tuple[float, ...] | None = None


def _read_rows(path: str, required: tuple[str, ...]) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in required:
            if col not in header:
                raise SchemaError(f"{path}: missing required column {col!r}")
        return list(reader)


# statistics.mean/stdev run on exact rationals internally, so a constant
# column yields exactly its value and exactly zero spread
def _mean(values) -> float:
    return float(statistics.mean(values))


def _sample_sd(values) -> float:
    if len(values) < 2:
        return 0.0
    return float(statistics.stdev(values))


def _coverage_rows(path: str, extra_cols: tuple[str, ...] = ()) -> list[dict]:
    rows = _read_rows(path, ("method", "coverage") + extra_cols)
    out = []
    for row in rows:
        if row["method"].endswith("#error"):
            continue  # failed trials carry no usable coverage
        out.append(row)
    return out


def coverage_cdf_series(path: str) -> list[Series]:
    """Per-method empirical CDF of per-trial coverage values."""
    by_method: dict[str, list[float]] = {}
    for row in _coverage_rows(path):
        by_method.setdefault(row["method"], []).append(float(row["coverage"]))
    series = []
    for method in sorted(by_method):
        values = sorted(by_method[method])
        n = len(values)
        heights = tuple((i + 1) / n for i in range(n))
        series.append(Series(label=method, x=tuple(values), y=heights))
    return series


def coverage_vs_shift_series(path: str) -> list[Series]:
    """Per-method mean coverage and sample sd per shift value."""
    by_key: dict[tuple[str, float], list[float]] = {}
    for row in _coverage_rows(path, ("shift",)):
        key = (row["method"], float(row["shift"]))
        by_key.setdefault(key, []).append(float(row["coverage"]))
    methods = sorted({m for m, _ in by_key})
    series = []
    for method in methods:
        shifts = sorted(s for m, s in by_key if m == method)
        means = tuple(_mean(by_key[(method, s)]) for s in shifts)
        sds = tuple(_sample_sd(by_key[(method, s)]) for s in shifts)
        series.append(Series(label=method, x=tuple(shifts), y=means, sd=sds))
    return series


def srm_curve_series(path: str) -> list[Series]:
    """Penalized-objective curves per (lambda, B) plus test-loss curves per B.

    Mirrors the layout of a selection study: for every penalty strength the
    mean objective against the sample size for each clip level, and one
    extra family of curves for the held-out squared error.
    """
    rows = _read_rows(path, ("b", "lambda", "m", "trial", "srm_objective", "test_l2"))
    obj: dict[tuple[float, float, int], list[float]] = {}
    loss: dict[tuple[float, int], list[float]] = {}
    for row in rows:
        b, lam, m = float(row["b"]), float(row["lambda"]), int(row["m"])
        obj.setdefault((lam, b, m), []).append(float(row["srm_objective"]))
        loss.setdefault((b, m), []).append(float(row["test_l2"]))
    series = []
    lams = sorted({lam for lam, _, _ in obj})
    bs = sorted({b for _, b, _ in obj})
    for lam in lams:
        for b in bs:
            ms = sorted(m for l2, b2, m in obj if l2 == lam and b2 == b)
            if not ms:
                continue
            series.append(
                Series(
                    label=f"objective lambda={lam:g} B={b:g}",
                    x=tuple(float(m) for m in ms),
                    y=tuple(_mean(obj[(lam, b, m)]) for m in ms),
                    sd=tuple(_sample_sd(obj[(lam, b, m)]) for m in ms),
                )
            )
    for b in bs:
        ms = sorted(m for b2, m in loss if b2 == b)
        series.append(
            Series(
                label=f"test_l2 B={b:g}",
                x=tuple(float(m) for m in ms),
                y=tuple(_mean(loss[(b, m)]) for m in ms),
                sd=tuple(_sample_sd(loss[(b, m)]) for m in ms),
            )
        )
    return series


def compute_series(job: PlotJob) -> list[Series]:
    if job.kind == "coverage-cdf":
        return coverage_cdf_series(job.csv_path)
    if job.kind == "coverage-vs-shift":
        return coverage_vs_shift_series(job.csv_path)
    return srm_curve_series(job.csv_path)


def dump_series(series: list[Series], nominal: float, kind: str) -> str:
    """Deterministic text rendering of the plotted numbers (17 digits)."""
    fmt = lambda v: f"{v:.17g}"
    lines = [f"kind {kind}", f"nominal {fmt(nominal)}"]
    for s in series:
        lines.append(f"series {s.label}")
        lines.append("x " + " ".join(fmt(v) for v in s.x))
        lines.append("y " + " ".join(fmt(v) for v in s.y))
        if s.sd is not None:
            lines.append("sd " + " ".join(fmt(v) for v in s.sd))
    return "\n".join(lines) + "\n"
