"""Input validation helpers shared across modules."""

from __future__ import annotations

import numbers

import numpy as np

from .exceptions import ValidationError


def as_float_vector(x, name="array", min_len=0):
    """Coerce to a 1-D float64 array, rejecting NaN/inf and bad shapes."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < min_len:
        raise ValidationError(f"{name} needs at least {min_len} entries, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return arr


def as_complex_vector(x, name="array", min_len=0):
    arr = np.asarray(x, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < min_len:
        raise ValidationError(f"{name} needs at least {min_len} entries, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return arr


def check_positive_scalar(x, name="value", allow_zero=False):
    if not isinstance(x, numbers.Real) or isinstance(x, bool):
        raise ValidationError(f"{name} must be a real number, got {type(x).__name__}")
    x = float(x)
    if not np.isfinite(x):
        raise ValidationError(f"{name} must be finite")
    if x < 0 or (x == 0 and not allow_zero):
        bound = "non-negative" if allow_zero else "positive"
        raise ValidationError(f"{name} must be {bound}, got {x}")
    return x


def check_count(x, name="count", minimum=0):
    if isinstance(x, bool) or not isinstance(x, numbers.Integral):
        raise ValidationError(f"{name} must be an integer, got {type(x).__name__}")
    x = int(x)
    if x < minimum:
        raise ValidationError(f"{name} must be >= {minimum}, got {x}")
    return x


def check_frequency_grid(omegas, name="omegas", nyquist=None):
    """Strictly increasing positive frequencies, optionally capped at Nyquist."""
    w = as_float_vector(omegas, name, min_len=1)
    if np.any(w <= 0):
        raise ValidationError(f"{name} must be strictly positive")
    if np.any(np.diff(w) <= 0):
        raise ValidationError(f"{name} must be strictly increasing")
    if nyquist is not None and w[-1] > nyquist * (1 + 1e-12):
        raise ValidationError(
            f"{name} exceeds the Nyquist frequency {nyquist:.6g} rad/s (max {w[-1]:.6g})"
        )
    return w


def frozen_array(x, dtype=float):
    """Immutable ndarray copy; our dataclass values never share mutable state."""
    arr = np.array(x, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr
