"""Numerical tolerances and size caps, overridable through the environment."""

import os

DEFAULT_TOL = 1e-9
DEFAULT_LP_TOL = 1e-7
DEFAULT_DIM_CAP = 4096
FORMAT_VERSION = "bellkit/1"


def _env_float(name, default):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    value = float(raw)
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {raw!r}")
    return value


def tol(value=None):
    """Algebraic tolerance; explicit ``value`` wins over BELLKIT_TOL."""
    if value is not None:
        if not value > 0:
            raise ValueError("tolerance must be positive")
        return float(value)
    return _env_float("BELLKIT_TOL", DEFAULT_TOL)


def lp_tol(value=None):
    if value is not None:
        if not value > 0:
            raise ValueError("LP tolerance must be positive")
        return float(value)
    return _env_float("BELLKIT_LP_TOL", DEFAULT_LP_TOL)


def dim_cap(value=None):
    if value is not None:
        return int(value)
    return int(_env_float("BELLKIT_DIM_CAP", DEFAULT_DIM_CAP))
