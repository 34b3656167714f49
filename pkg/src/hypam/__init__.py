"""Toolkit for the multiplicative-noise heat equation on constant-curvature
hyperbolic spaces.

The package splits into five layers: special functions and shared quadrature
(:mod:`hypam.specialfn`), hyperboloid geometry with Brownian paths and heat
kernels (:mod:`hypam.hyperbolic`), fractional kernels and the noise covariance
(:mod:`hypam.kernels`), renewal-type moment upper bounds (:mod:`hypam.renewal`),
and Feynman-Kac Monte Carlo moments with the lower-bound machinery
(:mod:`hypam.fkmc`).  :mod:`hypam.cli` exposes everything as reproducible
experiments.
"""

from .fkmc import (
    BLOCK_SIZE,
    FkConfig,
    MomentEstimate,
    QSupResult,
    RatioPoint,
    SlopeReport,
    asymptotic_slope_check,
    ball_survival_probability,
    beta_critical,
    chaos_k1_estimate,
    dirichlet_eigenvalue_upper,
    intermittency_ratio,
    lower_lyapunov,
    moment_estimate,
    moment_series,
    p_critical,
    q_lower,
    q_sup,
)
from .hyperbolic import (
    BracketMode,
    BrownianPath,
    HeatKernelMode,
    KernelBracket,
    ModelPoint,
    RadialProfile,
    brownian_path,
    brownian_step,
    distance_coords,
    exp_map,
    heat_kernel,
    heat_semigroup_apply,
    minkowski_inner,
    sheet_violation,
    tangent_at,
)
from .rng import (
    stream_generator,
    stream_seed,
)
from .kernels import (
    KernelGrid,
    NoiseSpec,
    calibrate_lower_constant,
    covariance_form,
    dalang_check,
    g_alpha,
    g_alpha_lower,
    g_alpha_lower_log,
)
from .ledger import ConstantLedger, LedgerEntry
from .renewal import (
    BoundConfig,
    Regime,
    f_profile,
    psi_upper,
    regime_of,
    semigroup_decay_bound,
    theta,
    theta_slope_report,
    upper_exponent,
)
from .specialfn import (
    QuadratureError,
    QuadratureSpec,
    dm_h,
    dm_h_log,
    gamma_lower,
    gamma_upper,
    integrate,
    log_gamma_upper,
    neg_ei,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BLOCK_SIZE",
    "BoundConfig",
    "BracketMode",
    "BrownianPath",
    "ConstantLedger",
    "FkConfig",
    "HeatKernelMode",
    "KernelBracket",
    "KernelGrid",
    "LedgerEntry",
    "ModelPoint",
    "MomentEstimate",
    "NoiseSpec",
    "QSupResult",
    "QuadratureError",
    "QuadratureSpec",
    "RadialProfile",
    "RatioPoint",
    "Regime",
    "SlopeReport",
    "asymptotic_slope_check",
    "ball_survival_probability",
    "beta_critical",
    "brownian_path",
    "brownian_step",
    "calibrate_lower_constant",
    "chaos_k1_estimate",
    "covariance_form",
    "dalang_check",
    "dirichlet_eigenvalue_upper",
    "distance_coords",
    "dm_h",
    "dm_h_log",
    "exp_map",
    "f_profile",
    "g_alpha",
    "g_alpha_lower",
    "g_alpha_lower_log",
    "gamma_lower",
    "gamma_upper",
    "heat_kernel",
    "heat_semigroup_apply",
    "integrate",
    "intermittency_ratio",
    "log_gamma_upper",
    "lower_lyapunov",
    "minkowski_inner",
    "moment_estimate",
    "moment_series",
    "neg_ei",
    "p_critical",
    "psi_upper",
    "q_lower",
    "q_sup",
    "regime_of",
    "semigroup_decay_bound",
    "sheet_violation",
    "stream_generator",
    "stream_seed",
    "tangent_at",
    "theta",
    "theta_slope_report",
    "upper_exponent",
]
