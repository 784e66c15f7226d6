"""Minimal dense linear-algebra kernel plus the finite-difference gradient oracle.

Vectors are 1-d float64 numpy arrays, matrices 2-d row-major float64 arrays.
All operations are pure and validate their inputs; everything downstream
(LSTM, training, metrics) is built on this substrate.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import ConfigError, NumericalError


def as_vector(x) -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise ConfigError(f"expected a 1-d vector, got shape {v.shape}")
    return v


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2:
        raise ConfigError(f"expected a 2-d matrix, got shape {a.shape}")
    return a


def matvec(m, x) -> np.ndarray:
    """Matrix-vector product: result[i] = sum_j m[i, j] * x[j]."""
    a = as_matrix(m)
    v = as_vector(x)
    if a.shape[1] != v.shape[0]:
        raise ConfigError(
            f"matvec dimension mismatch: matrix is {a.shape[0]}x{a.shape[1]}, "
            f"vector has length {v.shape[0]}"
        )
    if not (np.isfinite(a).all() and np.isfinite(v).all()):
        raise ConfigError("matvec requires finite inputs")
    return a @ v


def sigmoid(x) -> np.ndarray:
    """Elementwise logistic function, overflow-safe for large |x|.

    Pre-activations are clipped to +-500 before exponentiation, which keeps
    exp finite while leaving every representable output unchanged.
    """
    z = np.clip(np.asarray(x, dtype=np.float64), -500.0, 500.0)
    return 1.0 / (1.0 + np.exp(-z))


def tanh(x) -> np.ndarray:
    """Elementwise hyperbolic tangent."""
    return np.tanh(np.asarray(x, dtype=np.float64))


def finite_diff_gradient(
    f: Callable[[np.ndarray], float], p, h: float = 1e-5
) -> np.ndarray:
    """Central-difference gradient of a scalar function at parameter vector p.

    result[i] = (f(p + h*e_i) - f(p - h*e_i)) / (2h)

    Serves as the independent oracle for every analytic gradient in the
    package; h defaults to the usual double-precision bias/round-off
    compromise.
    """
    if h <= 0:
        raise ConfigError(f"finite-difference step must be positive, got {h}")
    p0 = as_vector(p).copy()
    grad = np.empty_like(p0)
    for idx in range(p0.size):
        bump = np.zeros_like(p0)
        bump[idx] = h
        f_hi = float(f(p0 + bump))
        f_lo = float(f(p0 - bump))
        if not (np.isfinite(f_hi) and np.isfinite(f_lo)):
            raise NumericalError(
                f"finite-difference oracle saw a non-finite value at coordinate {idx}"
            )
        grad[idx] = (f_hi - f_lo) / (2.0 * h)
    return grad
