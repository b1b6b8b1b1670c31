"""Miniature coverage sweep: split vs weighted vs clipped-weighted.

Runs a reduced version of the Gaussian-shift sweep (fewer trials, smaller
samples than the acceptance configuration) and prints mean and standard
deviation of coverage per method and shift level.  The full-size run is
`cwcp coverage-exp` or the acceptance suite.
"""

import collections

import numpy as np

from cwcp.cli import default_config
from cwcp.experiments import run_coverage_experiment
from cwcp.ingest import ShiftConfig, SizeConfig
import dataclasses

cfg = dataclasses.replace(
    default_config("coverage-exp"),
    out_dir="/tmp/cwcp-demos/sweep",
    trials=10,
    shift=ShiftConfig(family="gaussian", d=20, grid=(0.0, 1.0, 2.0)),
    sizes=SizeConfig(m_train=1000, m_test=1000, m_est=400, m_cal=400, n_eval=1000),
)
report = run_coverage_experiment(cfg)

by = collections.defaultdict(list)
for row in report.rows:
    by[(row.method, row.shift)].append(row.coverage)

methods = sorted({m for m, _ in by})
shifts = sorted({s for _, s in by})
print(f"target coverage {1 - cfg.alpha}; results written to {cfg.out_dir}/coverage.csv\n")
header = "method      " + "  ".join(f"beta={s:<10g}" for s in shifts)
print(header)
for m in methods:
    cells = []
    for s in shifts:
        vals = by[(m, s)]
        cells.append(f"{np.mean(vals):.3f} +/-{np.std(vals, ddof=1):.3f}")
    print(f"{m:11s} " + "  ".join(cells))

print("\nreading the table: split ignores the shift and drifts down; the")
print("unclipped baseline tracks it with high variance; clipped variants")
print("stay near the target, trading width for stability as B shrinks.")
