"""Python face of the lfk toolkit.

Everything heavy lives in the compiled module; this package just re-exports
it.  Model and problem arguments are plain dicts with the same shape as the
"model" and "problem" sections of a CLI run config, e.g.

    import lfk
    est = lfk.fk_estimate(
        model={"sigma2": 1.0},
        problem={"rate": {"family": "quadratic", "coeff": 0.5}},
        p=0.0, n_paths=50000, seed=7)
"""

from ._lfk import (
    ConfigError,
    CriterionResult,
    DriftEstimate,
    DriftPrediction,
    ExpansionReport,
    ExponentPrediction,
    GridSolution,
    K1Report,
    LegendreValue,
    MCEstimate,
    MinimizerResult,
    PrefactorValue,
    RefineReport,
    ResidualEstimate,
    ResolutionError,
    SolverError,
    analytic_second_moment,
    auto_grid,
    canonical_config,
    config_hash,
    drift_estimate,
    drift_prediction_config,
    drift_prediction_momentum,
    empirical_moments,
    fk_estimate,
    gaussian_k0,
    gaussian_k1bar,
    gaussian_quadratic_functional,
    hamiltonian,
    hbar_sweep,
    jump_prefactor_mc,
    legendre,
    predict_exponent,
    prefactor,
    prefactor_mc,
    refine_order,
    semigroup_residual,
    solve_el_config,
    solve_el_jump,
    solve_el_momentum,
    solve_pide,
    verify,
)

__all__ = [
    "ConfigError",
    "CriterionResult",
    "DriftEstimate",
    "DriftPrediction",
    "ExpansionReport",
    "ExponentPrediction",
    "GridSolution",
    "K1Report",
    "LegendreValue",
    "MCEstimate",
    "MinimizerResult",
    "PrefactorValue",
    "RefineReport",
    "ResidualEstimate",
    "ResolutionError",
    "SolverError",
    "analytic_second_moment",
    "auto_grid",
    "canonical_config",
    "config_hash",
    "drift_estimate",
    "drift_prediction_config",
    "drift_prediction_momentum",
    "empirical_moments",
    "fk_estimate",
    "gaussian_k0",
    "gaussian_k1bar",
    "gaussian_quadratic_functional",
    "hamiltonian",
    "hbar_sweep",
    "jump_prefactor_mc",
    "legendre",
    "predict_exponent",
    "prefactor",
    "prefactor_mc",
    "refine_order",
    "semigroup_residual",
    "solve_el_config",
    "solve_el_jump",
    "solve_el_momentum",
    "solve_pide",
    "verify",
]

__version__ = "0.1.0"
