"""Archimedean copula selection and validation for right-censored bivariate data."""

__version__ = "0.1.0"

from .copulas import Copula, Family, alpha_from_tau, as_generator, clipped_alpha, tau_from_alpha
from .data import (
    DataError,
    MarginalModel,
    Sample,
    Scenario,
    SimulationConfig,
    calibrate_censoring,
    load_csv,
    load_scenario,
    save_csv,
    simulate_censored,
)
from .kendall import (
    KendallCurve,
    generator_estimate,
    graphical_curves,
    kendall_counting,
    kendall_from_joint,
    kendall_on_grid,
    tau_hat,
)
from .selection import (
    NumericalError,
    PipelineConfig,
    bootstrap_pseudo_p,
    estimate_curve,
    fit_alpha,
    impute_uv,
    l2_distance,
    omnibus_table,
    pseudo_mle,
    select,
    wang_gof,
)
from .survival import (
    KernelSpec,
    akritas_joint,
    avk_joint_single,
    beran_conditional,
    ecdf_bivariate,
    kaplan_meier,
)

__all__ = [
    "__version__",
    "Copula",
    "Family",
    "alpha_from_tau",
    "as_generator",
    "clipped_alpha",
    "tau_from_alpha",
    "DataError",
    "MarginalModel",
    "Sample",
    "Scenario",
    "SimulationConfig",
    "calibrate_censoring",
    "load_csv",
    "load_scenario",
    "save_csv",
    "simulate_censored",
    "KendallCurve",
    "generator_estimate",
    "graphical_curves",
    "kendall_counting",
    "kendall_from_joint",
    "kendall_on_grid",
    "tau_hat",
    "NumericalError",
    "PipelineConfig",
    "bootstrap_pseudo_p",
    "estimate_curve",
    "fit_alpha",
    "impute_uv",
    "l2_distance",
    "omnibus_table",
    "pseudo_mle",
    "select",
    "wang_gof",
    "KernelSpec",
    "akritas_joint",
    "avk_joint_single",
    "beran_conditional",
    "ecdf_bivariate",
    "kaplan_meier",
]
