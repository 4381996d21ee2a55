"""Orthonormal function systems on [t, T] and Gauss-Legendre quadrature.

Two complete orthonormal systems in L2([t, T]) are provided:

* ``LEGENDRE``: phi_j(tau) = sqrt((2j+1)/(T-t)) * P_j(2(tau-t)/(T-t) - 1)
* ``TRIGONOMETRIC``: phi_0 = 1/sqrt(T-t), then for r = 1, 2, ...
  phi_{2r-1} = sqrt(2/(T-t)) sin(2 pi r (tau-t)/(T-t)) and
  phi_{2r}   = sqrt(2/(T-t)) cos(2 pi r (tau-t)/(T-t)).

All evaluators accept numpy arrays for ``tau``.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

MAX_GAUSS_POINTS = 256


@dataclass(frozen=True)
class Interval:
    t: float
    T: float

    def __post_init__(self):
        if not (math.isfinite(self.t) and math.isfinite(self.T)):
            raise DomainError(f"interval endpoints must be finite, got [{self.t}, {self.T}]")
        if not self.T > self.t:
            raise DomainError(f"interval requires T > t, got [{self.t}, {self.T}]")

    @property
    def length(self) -> float:
        return self.T - self.t

    def to_unit(self, tau):
        """Map [t, T] affinely onto [-1, 1]."""
        return 2.0 * (np.asarray(tau, dtype=float) - self.t) / self.length - 1.0

    def from_unit(self, x):
        return self.t + 0.5 * (np.asarray(x, dtype=float) + 1.0) * self.length


UNIT = Interval(0.0, 1.0)


class BasisKind(enum.Enum):
    LEGENDRE = "legendre"
    TRIGONOMETRIC = "trig"

    @classmethod
    def parse(cls, name: str) -> "BasisKind":
        key = name.strip().lower()
        aliases = {"legendre": cls.LEGENDRE, "leg": cls.LEGENDRE,
                   "trig": cls.TRIGONOMETRIC, "trigonometric": cls.TRIGONOMETRIC}
        try:
            return aliases[key]
        except KeyError:
            raise DomainError(f"unknown basis {name!r}; expected 'legendre' or 'trig'") from None


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Gauss-Legendre nodes and weights on [-1, 1], exact up to ``degree``."""

    nodes: np.ndarray
    weights: np.ndarray
    degree: int

    @property
    def n(self) -> int:
        return len(self.nodes)

    def mapped(self, a: float, b: float):
        """Nodes and weights transplanted onto [a, b]."""
        half = 0.5 * (b - a)
        return a + half * (self.nodes + 1.0), half * self.weights


def _legendre_and_derivative(n: int, x: np.ndarray):
    p_prev = np.ones_like(x)
    p = x.copy()
    for j in range(1, n):
        p_prev, p = p, ((2 * j + 1) * x * p - j * p_prev) / (j + 1)
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


@functools.lru_cache(maxsize=None)
def gauss_legendre(n: int) -> QuadratureRule:
    """The n-point Gauss-Legendre rule on [-1, 1].

    Nodes are the roots of P_n found by Newton iteration from the
    Tricomi initial guesses; weights are 2 / ((1 - x^2) P_n'(x)^2).
    """
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_GAUSS_POINTS:
        raise DomainError(f"Gauss-Legendre point count must be in [1, {MAX_GAUSS_POINTS}], got {n!r}")
    n = int(n)
    if n == 1:
        nodes, weights = np.array([0.0]), np.array([2.0])
    else:
        i = np.arange(1, n + 1)
        x = np.cos(np.pi * (i - 0.25) / (n + 0.5))
        for _ in range(100):
            p, dp = _legendre_and_derivative(n, x)
            step = p / dp
            x = x - step
            if np.max(np.abs(step)) < 1e-15:
                break
        _, dp = _legendre_and_derivative(n, x)
        weights = 2.0 / ((1.0 - x * x) * dp * dp)
        order = np.argsort(x)
        nodes, weights = x[order], weights[order]
        # exact symmetry about 0
        nodes = 0.5 * (nodes - nodes[::-1])
        weights = 0.5 * (weights + weights[::-1])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes, weights, 2 * n - 1)


def legendre_polynomials(jmax: int, x):
    """Rows P_0(x), ..., P_jmax(x) by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    out = np.empty((jmax + 1,) + x.shape)
    out[0] = 1.0
    if jmax >= 1:
        out[1] = x
    for j in range(1, jmax):
        out[j + 1] = ((2 * j + 1) * x * out[j] - j * out[j - 1]) / (j + 1)
    return out


def _check_tau(tau, iv: Interval):
    tau = np.asarray(tau, dtype=float)
    tol = 1e-12 * iv.length
    if np.any(tau < iv.t - tol) or np.any(tau > iv.T + tol):
        raise DomainError(f"tau outside [{iv.t}, {iv.T}]")
    return np.clip(tau, iv.t, iv.T)


def basis_matrix(kind: BasisKind, jmax: int, tau, iv: Interval = UNIT) -> np.ndarray:
    """Array of shape (jmax + 1,) + shape(tau) holding phi_0..phi_jmax at tau."""
    if jmax < 0:
        raise DomainError(f"basis index must be nonnegative, got {jmax}")
    tau = _check_tau(tau, iv)
    L = iv.length
    if kind is BasisKind.LEGENDRE:
        P = legendre_polynomials(jmax, iv.to_unit(tau))
        scale = np.sqrt((2 * np.arange(jmax + 1) + 1) / L)
        return P * scale.reshape((-1,) + (1,) * tau.ndim)
    if kind is BasisKind.TRIGONOMETRIC:
        out = np.empty((jmax + 1,) + tau.shape)
        out[0] = 1.0 / math.sqrt(L)
        u = (tau - iv.t) / L
        amp = math.sqrt(2.0 / L)
        for j in range(1, jmax + 1):
            r = (j + 1) // 2
            f = np.sin if j % 2 else np.cos
            out[j] = amp * f(2.0 * np.pi * r * u)
        return out
    raise DomainError(f"unsupported basis {kind!r}")


def eval_basis(kind: BasisKind, j: int, tau, iv: Interval = UNIT):
    """phi_j(tau) on ``iv``; scalar in, scalar out."""
    if j < 0:
        raise DomainError(f"basis index must be nonnegative, got {j}")
    val = basis_matrix(kind, j, tau, iv)[j]
    return float(val) if val.ndim == 0 else val


def integrate_basis(kind: BasisKind, j: int, iv: Interval = UNIT) -> float:
    """The integral of phi_j over [t, T].

    Both shipped systems integrate to zero except phi_0, which gives
    sqrt(T - t): every Legendre P_j with j >= 1 is orthogonal to constants,
    and every trigonometric mode spans whole periods.
    """
    if j < 0:
        raise DomainError(f"basis index must be nonnegative, got {j}")
    if kind not in (BasisKind.LEGENDRE, BasisKind.TRIGONOMETRIC):
        raise DomainError(f"unsupported basis {kind!r}")
    return math.sqrt(iv.length) if j == 0 else 0.0


def panel_count(kind: BasisKind, jmax: int) -> int:
    """Quadrature panels used on [t, T] for integrands up to index jmax."""
    if kind is BasisKind.TRIGONOMETRIC:
        return max((jmax + 1) // 2, 1)
    return 1
