"""Probabilists' Hermite polynomials.

These are the polynomials orthogonal under the weight exp(-x^2/2),
H_n(x) = (-1)^n exp(x^2/2) d^n/dx^n exp(-x^2/2), so that
H_2(x) = x^2 - 1 and E[H_n(Z) H_m(Z)] = n! delta_nm for Z ~ N(0, 1).
They are *not* the physicists' polynomials (H_2 = 4x^2 - 2).

All functions broadcast over numpy arrays.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

MAX_DEGREE = 64


def _check_degree(n):
    if not isinstance(n, (int, np.integer)) or n < 0 or n > MAX_DEGREE:
        raise DomainError(f"Hermite degree must be an integer in [0, {MAX_DEGREE}], got {n!r}")


def hermite(n: int, x):
    """H_n(x) via H_{n+1} = x H_n - n H_{n-1}."""
    _check_degree(n)
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev if x.ndim else float(h_prev)
    h = x.copy()
    for k in range(1, n):
        h_prev, h = h, x * h - k * h_prev
    return h if x.ndim else float(h)


def hermite_explicit(n: int, x):
    """H_n(x) from the closed-form alternating sum; kept as a cross-check."""
    _check_degree(n)
    return hermite2_explicit(n, x, 1.0)


def hermite2_explicit(n: int, x, y):
    _check_degree(n)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    total = np.zeros(np.broadcast(x, y).shape)
    for i in range(n // 2 + 1):
        c = math.factorial(n) / (math.factorial(i) * math.factorial(n - 2 * i) * 2**i)
        total = total + (-1) ** i * c * x ** (n - 2 * i) * y**i
    return total if total.ndim else float(total)


def hermite2(n: int, x, y):
    """Two-argument Hermite polynomial H_n(x, y) = y^(n/2) H_n(x / sqrt(y)).

    Evaluated by the scaled recurrence H_{k+1} = x H_k - k y H_{k-1}, which
    is valid for y = 0 as well (where it reduces to x^n).
    """
    _check_degree(n)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise DomainError("H_n(x, y) requires y >= 0")
    x, y = np.broadcast_arrays(x, y)
    h_prev = np.ones(x.shape)
    if n == 0:
        return h_prev if x.ndim else float(h_prev)
    h = x.astype(float)
    for k in range(1, n):
        h_prev, h = h, x * h - k * y * h_prev
    return h if h.ndim else float(h)
