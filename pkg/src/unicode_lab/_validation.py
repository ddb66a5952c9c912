"""Small input checks shared across modules.

Scalars go through :func:`sklearn.utils.check_scalar` so error messages name
the offending parameter.
"""

import numbers

import numpy as np
from sklearn.utils import check_scalar


def check_positive(value, name, *, allow_zero=False):
    return float(
        check_scalar(
            value,
            name,
            target_type=numbers.Real,
            min_val=0.0,
            include_boundaries="left" if allow_zero else "neither",
        )
    )


def check_open_unit(value, name):
    """Scalar strictly inside (0, 1)."""
    return float(
        check_scalar(
            value, name, target_type=numbers.Real, min_val=0.0, max_val=1.0, include_boundaries="neither"
        )
    )


def check_int(value, name, *, min_val=None, max_val=None):
    if isinstance(value, (bool, np.bool_)):
        raise TypeError(f"{name} must be an integer, got bool")
    return int(check_scalar(value, name, target_type=numbers.Integral, min_val=min_val, max_val=max_val))


def check_vector(x, name, *, dim=None):
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-D vector, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"{name} must have length {dim}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def check_points(x, name, *, dim=None):
    """Coerce to a float array of shape (..., dim) with finite entries."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if dim is not None and arr.shape[-1] != dim:
        raise ValueError(f"{name} has trailing dimension {arr.shape[-1]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def check_timestep(t, T, name="t", *, allow_zero=False):
    return check_int(t, name, min_val=0 if allow_zero else 1, max_val=T)
