"""Test-driven reinforcement learning toolkit."""

from ._core import (
    BuiltinSuite,
    Env,
    ExactPolicy,
    GridChain,
    Metric,
    OptimalSet,
    TdrlError,
    Trajectory,
    TrajectoryDistribution,
    distance_to_set,
    enumerate_trajectories,
    make_env,
    mu_reference,
    optimal_set,
    p_hat,
    pass_count,
    skewness,
    soft_update_exact,
    train,
    verify_theory,
    wasserstein_to_dirac,
)

__all__ = [
    "BuiltinSuite",
    "Env",
    "ExactPolicy",
    "GridChain",
    "Metric",
    "OptimalSet",
    "TdrlError",
    "Trajectory",
    "TrajectoryDistribution",
    "distance_to_set",
    "enumerate_trajectories",
    "make_env",
    "mu_reference",
    "optimal_set",
    "p_hat",
    "pass_count",
    "skewness",
    "soft_update_exact",
    "train",
    "verify_theory",
    "wasserstein_to_dirac",
]
