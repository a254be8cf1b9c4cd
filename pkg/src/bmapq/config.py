"""Default tolerances, overridable through environment variables.

BMAPQ_TAIL_TOL      certified absolute error budget for infinite series
BMAPQ_GENERATOR_TOL residual tolerance for generator row sums / stationarity
BMAPQ_SOLVER_TOL    residual tolerance for the truncated stationary solve
"""

from __future__ import annotations

import os


def _env_float(name: str, default: float) -> float:
    raw = os.environ.get(name)
    if raw is None:
        return default
    return float(raw)


def tail_tol() -> float:
    return _env_float("BMAPQ_TAIL_TOL", 1e-10)


def generator_tol() -> float:
    return _env_float("BMAPQ_GENERATOR_TOL", 1e-12)


def solver_tol() -> float:
    return _env_float("BMAPQ_SOLVER_TOL", 1e-10)


# Normalizing constants of parametric batch families (relative error).
NORMALIZER_RTOL = 1e-12

# Largest batch materialized as an exact integer; beyond this the sampler
# reports the batch in log scale.
MAX_EXACT_BATCH = 2**62
