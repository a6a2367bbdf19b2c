"""Synthesis and verification of rate-optimal ergodic diffusions.

Given a target stationary density on an interval and an average diffusion
budget, the package constructs the diffusion process with the largest
spectral gap among all processes sharing that density and budget, and checks
the construction numerically: spectrum, detailed balance, stochastic paths,
and density evolution.
"""

from .distributions import (
    Beta,
    CubicPearson,
    Custom,
    DistributionSpec,
    FisherSnedecor,
    Gamma,
    Hyperexponential,
    InverseGamma,
    Jacobi,
    Mixture,
    Normal,
    StudentCauchy,
    Support,
    load_spec,
    mixture,
    parse_spec,
)
from .optimal import OptimalProcess, synthesize, variance_at
from .pearson import ROW_NAMES, row, eigenfunction
from .sim import SimConfig, simulate, estimate_rate
from .spectral import default_grid, discretize_generator, spectrum, evolve_fpe

__version__ = "0.1.0"

__all__ = [
    "Beta",
    "CubicPearson",
    "Custom",
    "DistributionSpec",
    "FisherSnedecor",
    "Gamma",
    "Hyperexponential",
    "InverseGamma",
    "Jacobi",
    "Mixture",
    "Normal",
    "OptimalProcess",
    "ROW_NAMES",
    "SimConfig",
    "StudentCauchy",
    "Support",
    "default_grid",
    "discretize_generator",
    "eigenfunction",
    "estimate_rate",
    "evolve_fpe",
    "load_spec",
    "mixture",
    "parse_spec",
    "row",
    "simulate",
    "spectrum",
    "synthesize",
    "variance_at",
    "__version__",
]
