"""Input validation helpers shared by the estimators and the CLI."""

from __future__ import annotations

import numbers

import numpy as np

from .exceptions import InputError, PreconditionError


def check_sample(x, name: str = "x", min_size: int = 1) -> np.ndarray:
    """Return a fresh 1-D float64 copy of ``x`` after checking it.

    Column vectors of shape ``(n, 1)`` are accepted and flattened, so
    estimators can be fed a 2-D ``X`` in the usual way.
    """
    try:
        arr = np.array(x, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name} must be numeric: {exc}") from None
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0].copy()
    if arr.ndim != 1:
        raise InputError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.shape[0] < min_size:
        raise InputError(f"{name} needs at least {min_size} value(s), got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite values")
    return arr


def check_alpha(alpha) -> float:
    if not isinstance(alpha, numbers.Real) or not (0 < alpha < 1):
        raise PreconditionError(f"alpha must lie in (0, 1), got {alpha!r}")
    return float(alpha)


def check_positive(value, name: str) -> float:
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise PreconditionError(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


def check_count(value, name: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < minimum:
        raise PreconditionError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_choice(value, name: str, choices) -> str:
    if value not in choices:
        raise PreconditionError(f"{name} must be one of {sorted(choices)}, got {value!r}")
    return value
