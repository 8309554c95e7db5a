"""Small input-validation helpers shared across the package."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import DimensionMismatch, InvalidThreshold


def as_fraction(value) -> Fraction:
    """Interpret a threshold as an exact fraction.

    Floats are read through their shortest decimal repr (0.02 -> 1/50), so
    thresholds typed by a human compare exactly against integer counts.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(str(value))


def check_threshold(value, name: str = "min_supp", allow_zero: bool = False) -> Fraction:
    """Validate a support/confidence threshold and return it as a Fraction."""
    frac = as_fraction(value)
    low_ok = frac >= 0 if allow_zero else frac > 0
    if not (low_ok and frac <= 1):
        raise InvalidThreshold(f"{name} must be in {'[0,1]' if allow_zero else '(0,1]'}, got {value}")
    return frac


def ceil_fraction(frac: Fraction, count: int) -> int:
    """Smallest integer c with c/count >= frac, computed exactly."""
    return -((-frac.numerator * count) // frac.denominator)


def check_feature_array(points, expected_dim: int | None = None) -> np.ndarray:
    """Coerce points to a 2-D float array, checking dimensionality."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D point array, got shape {arr.shape}")
    if expected_dim is not None and arr.shape[1] != expected_dim:
        raise DimensionMismatch(f"expected dimension {expected_dim}, got {arr.shape[1]}")
    return arr
