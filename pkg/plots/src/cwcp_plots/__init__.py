"""Figure rendering for sweep result CSVs.

Read-only over the result files; the CSV column layout is the only contract
with the code that produced them.
"""

from .series import (
    PLOT_KINDS,
    PlotJob,
    SchemaError,
    Series,
    compute_series,
    coverage_cdf_series,
    coverage_vs_shift_series,
    dump_series,
    srm_curve_series,
)
from .render import render

__all__ = [
    "PLOT_KINDS",
    "PlotJob",
    "SchemaError",
    "Series",
    "compute_series",
    "coverage_cdf_series",
    "coverage_vs_shift_series",
    "dump_series",
    "render",
    "srm_curve_series",
]
