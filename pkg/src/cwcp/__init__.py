"""Conformal prediction under covariate shift with clipped importance weights.

The pipeline has three stages, each usable on its own:

1. fit a density ratio over a family clipped at a level B
   (:func:`cwcp.ratios.clisf`), optionally choosing B by structural risk
   minimization (:func:`cwcp.ratios.srm_select`);
2. estimate the bias the clipping introduced
   (:func:`cwcp.bias.estimate_clipping_bias`);
3. calibrate a weighted conformal threshold at a level inflated by that
   bias plus a finite-sample correction
   (:func:`cwcp.calibration.calibrate_threshold` at
   :func:`cwcp.calibration.cwcp_effective_level`).

Synthetic shift families with exact ratios (:mod:`cwcp.shifts`,
:mod:`cwcp.synth`), closed-form bias oracles and finite-sample bound
calculators (:mod:`cwcp.bias`), and seeded experiment sweeps
(:mod:`cwcp.experiments`, ``cwcp`` CLI) support validation end to end.
"""

from .calibration import (
    CalibrationConfig,
    CalibrationResult,
    CoverageReport,
    CoverageRow,
    ScoredCalibrationSet,
    calibrate_threshold,
    cwcp_effective_level,
    evaluate_coverage,
    sup_cdf_gap,
    weighted_cdf,
)
from .bias import (
    BiasEstimate,
    RatioErrorEstimate,
    analytic_delta_b,
    analytic_tv,
    bias_deviation_bound,
    estimate_clipping_bias,
    mc_delta_b,
    mc_l1_l2_error,
    moment_bias_bound,
    wcp_calibration_size,
    weighted_dkw_bound,
)
from .ingest import (
    ConfigError,
    CsvSchema,
    DataFormatError,
    RunConfig,
    load_config,
    read_dataset,
    read_results,
    schema_for,
    write_dataset,
    write_results,
)
from .ratios import (
    ExponentialTilt,
    FitReport,
    MonteCarloEstimate,
    NeedleOneParam,
    PiecewiseConstant,
    RatioFit,
    SampleSizePlan,
    Tabulated,
    TiltOptimizerSettings,
    clisf,
    fit_exponential_tilt,
    fit_needle_class,
    fit_piecewise_known_p,
    fit_piecewise_unknown_p,
    lsif_empirical_risk,
    mc_population_risk,
    required_sample_sizes,
    srm_select,
)
from .shifts import GaussianTiltShift, NeedleShift, PowerLawShift, true_ratio
from .synth import (
    GeneratedDataset,
    fit_linear_predictor,
    gen_gaussian_shift,
    gen_needle,
    gen_powerlaw,
    residual_scores,
)

__version__ = "0.1.0"

__all__ = [
    "BiasEstimate",
    "CalibrationConfig",
    "CalibrationResult",
    "ConfigError",
    "CoverageReport",
    "CoverageRow",
    "CsvSchema",
    "DataFormatError",
    "ExponentialTilt",
    "FitReport",
    "GaussianTiltShift",
    "GeneratedDataset",
    "MonteCarloEstimate",
    "NeedleOneParam",
    "NeedleShift",
    "PiecewiseConstant",
    "PowerLawShift",
    "RatioErrorEstimate",
    "RatioFit",
    "RunConfig",
    "SampleSizePlan",
    "ScoredCalibrationSet",
    "Tabulated",
    "TiltOptimizerSettings",
    "analytic_delta_b",
    "analytic_tv",
    "bias_deviation_bound",
    "calibrate_threshold",
    "clisf",
    "cwcp_effective_level",
    "estimate_clipping_bias",
    "evaluate_coverage",
    "fit_exponential_tilt",
    "fit_linear_predictor",
    "fit_needle_class",
    "fit_piecewise_known_p",
    "fit_piecewise_unknown_p",
    "gen_gaussian_shift",
    "gen_needle",
    "gen_powerlaw",
    "load_config",
    "lsif_empirical_risk",
    "mc_delta_b",
    "mc_l1_l2_error",
    "mc_population_risk",
    "moment_bias_bound",
    "read_dataset",
    "read_results",
    "required_sample_sizes",
    "residual_scores",
    "schema_for",
    "srm_select",
    "sup_cdf_gap",
    "true_ratio",
    "wcp_calibration_size",
    "weighted_cdf",
    "weighted_dkw_bound",
    "write_dataset",
    "write_results",
]
