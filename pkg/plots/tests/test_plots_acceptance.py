"""Acceptance for the plotting package.

The golden fixture is the coverage CSV from the library's seeded desk-scale
Gaussian sweep (the acceptance configuration of the producing package).
Both coverage plot kinds must render it and emit `--dump-series` text whose
numbers match independently computed mean/sd/ECDF values to 1e-12.
"""

import csv
import math
import os
from collections import defaultdict

from cwcp_plots import PlotJob, render

GOLDEN = os.path.join(os.path.dirname(__file__), "data", "gaussian_sweep.csv")


def load_golden():
    with open(GOLDEN, newline="") as fh:
        return [r for r in csv.DictReader(fh) if not r["method"].endswith("#error")]


def parse_dump(path):
    series = {}
    label = None
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("series "):
                label = line[len("series "):]
                series[label] = {}
            elif label is not None:
                key, *values = line.split(" ")
                series[label][key] = [float(v) for v in values]
    return series


def report(part, desc, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion 12{part}: {desc}"
    if detail:
        line += f"  [{detail}]"
    print(line)
    assert ok, line


def test_c12a_coverage_cdf_series_match_oracle(tmp_path):
    job = PlotJob(
        csv_path=GOLDEN,
        kind="coverage-cdf",
        out_path=str(tmp_path / "cdf.svg"),
        dump_path=str(tmp_path / "cdf.txt"),
    )
    render(job)
    dumped = parse_dump(str(tmp_path / "cdf.txt"))

    by_method = defaultdict(list)
    for row in load_golden():
        by_method[row["method"]].append(float(row["coverage"]))

    worst = 0.0
    for method, values in by_method.items():
        expected_x = sorted(values)
        n = len(values)
        expected_y = [(i + 1) / n for i in range(n)]
        got = dumped[method]
        assert len(got["x"]) == n
        worst = max(
            worst,
            max(abs(a - b) for a, b in zip(got["x"], expected_x)),
            max(abs(a - b) for a, b in zip(got["y"], expected_y)),
        )
    ok = worst <= 1e-12 and (tmp_path / "cdf.svg").stat().st_size > 0
    report("a", "coverage ECDF series match an independent oracle", ok, f"max dev={worst:.2e}")


def test_c12b_coverage_vs_shift_series_match_oracle(tmp_path):
    job = PlotJob(
        csv_path=GOLDEN,
        kind="coverage-vs-shift",
        out_path=str(tmp_path / "shift.svg"),
        dump_path=str(tmp_path / "shift.txt"),
    )
    render(job)
    dumped = parse_dump(str(tmp_path / "shift.txt"))

    by_key = defaultdict(list)
    for row in load_golden():
        by_key[(row["method"], float(row["shift"]))].append(float(row["coverage"]))
    methods = sorted({m for m, _ in by_key})

    worst = 0.0
    for method in methods:
        shifts = sorted(s for m, s in by_key if m == method)
        got = dumped[method]
        assert got["x"] == shifts
        for i, s in enumerate(shifts):
            values = by_key[(method, s)]
            mean = sum(values) / len(values)
            sd = math.sqrt(sum((v - mean) ** 2 for v in values) / (len(values) - 1))
            worst = max(worst, abs(got["y"][i] - mean), abs(got["sd"][i] - sd))
    ok = worst <= 1e-12 and (tmp_path / "shift.svg").stat().st_size > 0
    report("b", "mean/sd-vs-shift series match an independent oracle", ok, f"max dev={worst:.2e}")


def test_c12c_images_and_series_reproducible(tmp_path):
    digests = []
    for tag in ("r1", "r2"):
        job = PlotJob(
            csv_path=GOLDEN,
            kind="coverage-vs-shift",
            out_path=str(tmp_path / f"{tag}.svg"),
            dump_path=str(tmp_path / f"{tag}.txt"),
        )
        render(job)
        digests.append(
            ((tmp_path / f"{tag}.svg").read_bytes(), (tmp_path / f"{tag}.txt").read_text())
        )
    ok = digests[0] == digests[1]
    report("c", "repeated renders are byte-identical", ok)
