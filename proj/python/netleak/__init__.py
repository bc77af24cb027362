"""Provider patient-sharing networks, community detection, and
service-leakage analysis from healthcare claims data."""

from netleak._core import (
    __version__,
    adjusted_rand_index,
    default_config,
    fast_greedy,
    generate_synthetic,
    herfindahl,
    modularity,
    rca,
    risk_adjusted_pmpm,
    run_pipeline,
    run_stage,
)

__all__ = [
    "__version__",
    "adjusted_rand_index",
    "default_config",
    "fast_greedy",
    "generate_synthetic",
    "herfindahl",
    "modularity",
    "rca",
    "risk_adjusted_pmpm",
    "run_pipeline",
    "run_stage",
]
