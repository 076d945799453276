"""Input validation helpers.

These mirror the ``check_array`` family in scikit-learn: coerce to a float
ndarray, check shape and finiteness, and raise one of our typed errors.
"""

import numbers

import numpy as np

from .exceptions import DimensionMismatch, NonFiniteInput, SimplexViolation, ValidationError

SIMPLEX_TOL = 1e-9


def check_positive_int(value, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < 1:
        raise ValidationError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_vector(x, name, length=None):
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{name} must be one-dimensional, got shape {arr.shape}")
    if length is not None and arr.shape[0] != length:
        raise DimensionMismatch(f"{name} must have length {length}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInput(f"{name} contains non-finite entries")
    return arr


def check_matrix(x, name, shape=None):
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be two-dimensional, got shape {arr.shape}")
    if shape is not None and arr.shape != tuple(shape):
        raise DimensionMismatch(f"{name} must have shape {tuple(shape)}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInput(f"{name} contains non-finite entries")
    return arr


def check_gamma(gamma):
    if isinstance(gamma, bool) or not isinstance(gamma, numbers.Real):
        raise ValidationError(f"gamma must be a real number, got {gamma!r}")
    gamma = float(gamma)
    if not (0.0 <= gamma < 1.0):
        raise ValidationError(f"gamma must lie in [0, 1), got {gamma}")
    return gamma


def check_distribution(p, name, tol=SIMPLEX_TOL):
    """Validate a single probability vector. Returns it unchanged (as float array)."""
    p = check_vector(p, name)
    if p.size == 0:
        raise DimensionMismatch(f"{name} must be non-empty")
    if np.any(p < -tol):
        raise SimplexViolation(f"{name} has negative entries (min {p.min():.3g})")
    total = p.sum()
    if abs(total - 1.0) > tol:
        raise SimplexViolation(f"{name} sums to {total!r}, expected 1")
    return p


def check_row_stochastic(M, name, tol=SIMPLEX_TOL, row_label=None):
    """Raise SimplexViolation naming the first bad row of ``M``."""
    label = row_label or (lambda i: f"row {i}")
    neg = np.where((M < -tol).any(axis=1))[0]
    if neg.size:
        i = int(neg[0])
        raise SimplexViolation(f"{name} {label(i)} has negative entries")
    dev = np.abs(M.sum(axis=1) - 1.0)
    bad = np.where(dev > tol)[0]
    if bad.size:
        i = int(bad[0])
        raise SimplexViolation(f"{name} {label(i)} sums to {M[i].sum()!r}, expected 1")
    return M


def frozen(arr):
    """Return a read-only copy so shared instances stay immutable."""
    out = np.array(arr, dtype=float, copy=True)
    out.setflags(write=False)
    return out
