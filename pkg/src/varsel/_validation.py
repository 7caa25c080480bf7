"""Small input-validation helpers shared by estimators and data types."""

from __future__ import annotations

import numpy as np

from .exceptions import DimensionMismatch


def as_float_matrix(x, name="x"):
    """Coerce to a 2-D float64 array with finite entries."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def as_float_vector(y, name="y"):
    """Coerce to a 1-D float64 array with finite entries."""
    arr = np.asarray(y, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-D, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_same_rows(x, y, xname="x", yname="y"):
    if x.shape[0] != y.shape[0]:
        raise DimensionMismatch(
            f"{xname} has {x.shape[0]} rows but {yname} has {y.shape[0]}"
        )


def column_names_of(x, p):
    """Feature names from a DataFrame-like object, else x1..xp."""
    cols = getattr(x, "columns", None)
    if cols is not None:
        return tuple(str(c) for c in cols)
    return tuple(f"x{j + 1}" for j in range(p))
