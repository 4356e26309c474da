from .grid import GridFunction, finite_diff, quadrature
from .identities import FiniteJoint, eve_law_check, hoeffding_cov
from .mc import (
    McEstimate,
    Moments,
    corr2_estimate,
    corr_estimate,
    cov_estimate,
    mc_moments,
    mean_estimate,
    moments_of,
    per_replication,
    second_moment_estimate,
    simulate,
    var_estimate,
)
from .rng import RandomStream, Replications, philox4x32

__all__ = [
    "GridFunction", "finite_diff", "quadrature",
    "FiniteJoint", "eve_law_check", "hoeffding_cov",
    "McEstimate", "Moments", "corr2_estimate", "corr_estimate", "cov_estimate", "mc_moments",
    "mean_estimate", "moments_of", "per_replication", "second_moment_estimate", "simulate",
    "var_estimate",
    "RandomStream", "Replications", "philox4x32",
]
