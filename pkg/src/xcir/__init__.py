"""Time-varying-parameter square-root short-rate model toolkit.

Closed-form transforms of the rate, scaled noncentral chi-squared
distribution, Riccati bond pricing, transform-inversion bond-option
pricing, and Monte Carlo simulators that cross-validate every formula.
"""

from .bondpricing import BondSolution, bond_price_constant_analytic, solve_riccati
from .charfn import DensityResult, RateLaw, fokker_planck_residual
from .errors import InversionError, ResourceLimitError, SolverError, XcirError
from .montecarlo import (
    ConstructiveConfig,
    PathSet,
    SimConfig,
    mc_bond_price,
    mc_option_price,
    simulate_cir,
    simulate_constructive,
    simulate_correlated_wv,
    simulate_forward_measure,
    simulate_stochvol_independent,
)
from .optionpricer import (
    InversionConfig,
    OptionSpec,
    forward_drift,
    payoff_laplace,
    price_call_constant_analytic,
    price_call_fourier,
    price_call_laplace,
)
from .sncchi2 import SncChi2
from .stochvol import (
    CorrelatedWvModel,
    IndependentVolModel,
    VolDynamics,
    conditional_cf_correlated,
    conditional_cf_independent,
    conditional_laplace_taylor,
    terminal_vol_bins,
)
from .termstructure import (
    DimensionReport,
    ExtendedCirParams,
    ParameterCurve,
    curve_from_json,
    dimension,
    integrate_b,
    validate_assumption1,
)

__all__ = [
    "BondSolution",
    "ConstructiveConfig",
    "CorrelatedWvModel",
    "DensityResult",
    "DimensionReport",
    "ExtendedCirParams",
    "IndependentVolModel",
    "InversionConfig",
    "InversionError",
    "OptionSpec",
    "ParameterCurve",
    "PathSet",
    "RateLaw",
    "ResourceLimitError",
    "SimConfig",
    "SncChi2",
    "SolverError",
    "VolDynamics",
    "XcirError",
    "bond_price_constant_analytic",
    "conditional_cf_correlated",
    "conditional_cf_independent",
    "conditional_laplace_taylor",
    "curve_from_json",
    "dimension",
    "fokker_planck_residual",
    "forward_drift",
    "integrate_b",
    "mc_bond_price",
    "mc_option_price",
    "payoff_laplace",
    "price_call_constant_analytic",
    "price_call_fourier",
    "price_call_laplace",
    "simulate_cir",
    "simulate_constructive",
    "simulate_correlated_wv",
    "simulate_forward_measure",
    "simulate_stochvol_independent",
    "solve_riccati",
    "terminal_vol_bins",
    "validate_assumption1",
]

__version__ = "0.1.0"
