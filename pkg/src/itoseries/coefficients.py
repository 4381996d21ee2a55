"""Volterra kernels, their generalized Fourier coefficients, and truncation residuals.

The kernel of a k-fold iterated integral with weights psi_1..psi_k is

    K(t_1, ..., t_k) = psi_1(t_1) ... psi_k(t_k)   if t_1 < ... < t_k, else 0,

and its coefficient against the product basis is

    C[j_1, ..., j_k] = int_t^T psi_k phi_{j_k}(t_k) ... int_t^{t_2} psi_1 phi_{j_1}(t_1) dt_1 ... dt_k.

Coefficients are stored row-major with axis l holding j_{l+1}; in subscript
notation the entry ``values[j_1, ..., j_k]`` is often written C_{j_k...j_1}.

The nested integral is evaluated level by level on a Gauss-Legendre grid.
Each inner antiderivative is represented by its values at the grid nodes,
obtained from the node values of the integrand through a spectral
integration matrix (interpolate in Legendre polynomials on each panel,
integrate exactly). Polynomial integrands of degree < n per panel are thus
integrated exactly at every level.
"""
from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .basis import (
    BasisKind,
    Interval,
    MAX_GAUSS_POINTS,
    UNIT,
    basis_matrix,
    gauss_legendre,
    legendre_polynomials,
    panel_count,
)
from .combinatorics import MAX_ORDER
from .errors import DomainError, MemoryBudgetError, QuadratureError

FORMAT_VERSION = 1
MAX_TENSOR_ENTRIES = 10**7
MAX_QUADRATURE_ORDER = 6
DEGREE_CHECK_TOL = 1e-8
DEFAULT_DEGREE = 64


# --------------------------------------------------------------------------
# weight functions


@dataclass(frozen=True)
class Constant:
    c: float = 1.0

    def __call__(self, tau, iv: Interval):
        return np.full(np.shape(tau), float(self.c))

    def descriptor(self) -> dict:
        return {"kind": "const", "c": float(self.c)}


@dataclass(frozen=True)
class PowerOfElapsed:
    """psi(tau) = scale * (tau - t)^q."""

    q: int
    scale: float = 1.0

    def __post_init__(self):
        if not isinstance(self.q, (int, np.integer)) or self.q < 0:
            raise DomainError(f"power must be a nonnegative integer, got {self.q!r}")

    def __call__(self, tau, iv: Interval):
        return self.scale * (np.asarray(tau, dtype=float) - iv.t) ** self.q

    def descriptor(self) -> dict:
        return {"kind": "pow", "q": int(self.q), "scale": float(self.scale)}


@dataclass(frozen=True)
class Tabulated:
    """Piecewise-linear interpolant through (tau, value) knots.

    Constant extrapolation beyond the first and last knot.
    """

    nodes: tuple[tuple[float, float], ...]

    def __post_init__(self):
        taus = [float(a) for a, _ in self.nodes]
        if len(taus) < 2 or any(b <= a for a, b in zip(taus, taus[1:])):
            raise DomainError("tabulated weight needs at least two strictly increasing knots")

    def __call__(self, tau, iv: Interval):
        xs, ys = zip(*self.nodes)
        return np.interp(np.asarray(tau, dtype=float), xs, ys)

    def knots(self) -> tuple[float, ...]:
        return tuple(float(a) for a, _ in self.nodes)

    def descriptor(self) -> dict:
        return {"kind": "table", "nodes": [[float(a), float(b)] for a, b in self.nodes]}


WeightSpec = Union[Constant, PowerOfElapsed, Tabulated]


def parse_weight(text: str) -> WeightSpec:
    """Parse a weight token: ``const``, ``const:C``, ``pow:Q[:SCALE]`` or
    ``table:TAU@V;TAU@V;...``."""
    kind, _, rest = text.strip().partition(":")
    kind = kind.lower()
    try:
        if kind == "const":
            return Constant(float(rest) if rest else 1.0)
        if kind == "pow":
            parts = rest.split(":")
            q = int(parts[0])
            return PowerOfElapsed(q, float(parts[1]) if len(parts) > 1 else 1.0)
        if kind == "table":
            pts = tuple(tuple(float(v) for v in item.split("@")) for item in rest.split(";") if item)
            if any(len(p) != 2 for p in pts):
                raise ValueError(rest)
            return Tabulated(pts)
    except ValueError as exc:
        raise DomainError(f"malformed weight spec {text!r}") from exc
    raise DomainError(f"unknown weight kind {kind!r}; expected const, pow or table")


def weight_from_descriptor(d: dict) -> WeightSpec:
    kind = d.get("kind")
    if kind == "const":
        return Constant(d["c"])
    if kind == "pow":
        return PowerOfElapsed(int(d["q"]), d["scale"])
    if kind == "table":
        return Tabulated(tuple((a, b) for a, b in d["nodes"]))
    raise DomainError(f"unknown weight descriptor {d!r}")


@dataclass(frozen=True)
class KernelSpec:
    """Factorized Volterra kernel on the ordered simplex of [t, T]^k."""

    weights: tuple[WeightSpec, ...]
    iv: Interval = UNIT

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(self.weights))
        if not 1 <= len(self.weights) <= MAX_ORDER:
            raise DomainError(f"kernel multiplicity must be in [1, {MAX_ORDER}], got {len(self.weights)}")
        for w in self.weights:
            if isinstance(w, Tabulated) and (w.knots()[0] < self.iv.t or w.knots()[-1] > self.iv.T):
                raise DomainError("tabulated knots must lie within [t, T]")

    @property
    def k(self) -> int:
        return len(self.weights)

    @classmethod
    def uniform(cls, k: int, weight: WeightSpec | None = None, iv: Interval = UNIT) -> "KernelSpec":
        return cls((weight or Constant(1.0),) * k, iv)

    def knots(self) -> tuple[float, ...]:
        pts = set()
        for w in self.weights:
            if isinstance(w, Tabulated):
                pts.update(x for x in w.knots() if self.iv.t < x < self.iv.T)
        return tuple(sorted(pts))


def kernel_eval(ks: KernelSpec, point: Sequence[float]) -> float:
    point = [float(x) for x in point]
    if len(point) != ks.k:
        raise DomainError(f"point has {len(point)} coordinates, kernel has k={ks.k}")
    tol = 1e-12 * ks.iv.length
    if any(x < ks.iv.t - tol or x > ks.iv.T + tol for x in point):
        raise DomainError(f"point outside [{ks.iv.t}, {ks.iv.T}]^{ks.k}")
    if any(b <= a for a, b in zip(point, point[1:])):
        return 0.0
    value = 1.0
    for w, x in zip(ks.weights, point):
        value *= float(w(np.float64(x), ks.iv))
    return value


# --------------------------------------------------------------------------
# nested simplex quadrature


@functools.lru_cache(maxsize=None)
def _spectral_integration_matrix(n: int) -> np.ndarray:
    """S with (S f)_a = int_{-1}^{x_a} p(x) dx, p the degree n-1 interpolant of f."""
    rule = gauss_legendre(n)
    x, w = rule.nodes, rule.weights
    P = legendre_polynomials(n, x)  # (n+1, n)
    m = np.arange(n)
    # Legendre coefficients: c_m = (2m+1)/2 sum_b w_b P_m(x_b) f_b
    analysis = ((2 * m + 1) / 2.0)[:, None] * P[:n] * w[None, :]
    anti = np.empty((n, n))
    anti[:, 0] = x + 1.0
    for mm in range(1, n):
        anti[:, mm] = (P[mm + 1] - P[mm - 1]) / (2 * mm + 1)
    S = anti @ analysis
    S.setflags(write=False)
    return S


@dataclass(frozen=True, eq=False)
class SimplexGrid:
    """Composite Gauss-Legendre grid on [t, T] with cumulative integration."""

    breaks: np.ndarray
    n: int
    nodes: np.ndarray = field(init=False)
    weights: np.ndarray = field(init=False)

    def __post_init__(self):
        rule = gauss_legendre(self.n)
        half = 0.5 * np.diff(self.breaks)
        nodes = (self.breaks[:-1, None] + half[:, None] * (rule.nodes[None, :] + 1.0)).ravel()
        weights = (half[:, None] * rule.weights[None, :]).ravel()
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "_half", half)

    @classmethod
    def build(cls, iv: Interval, n: int, panels: int = 1, knots=()) -> "SimplexGrid":
        if not 1 <= n <= MAX_GAUSS_POINTS:
            raise DomainError(f"quadrature degree must be in [1, {MAX_GAUSS_POINTS}], got {n}")
        pts = set(np.linspace(iv.t, iv.T, panels + 1).tolist()) | set(knots)
        return cls(np.array(sorted(pts)), n)

    @property
    def panels(self) -> int:
        return len(self.breaks) - 1

    def cumulative(self, f: np.ndarray) -> np.ndarray:
        """Node values of int_t^x f, for f given at the nodes along axis 0."""
        P, n = self.panels, self.n
        rest = f.shape[1:]
        fp = f.reshape((P, n) + rest)
        half = self._half.reshape((P,) + (1,) * (len(rest) + 1))
        S = _spectral_integration_matrix(n)
        local = half * np.einsum("ab,pb...->pa...", S, fp)
        rule = gauss_legendre(n)
        totals = self._half.reshape((P,) + (1,) * len(rest)) * np.einsum("b,pb...->p...", rule.weights, fp)
        offsets = np.cumsum(totals, axis=0) - totals
        return (local + offsets[:, None]).reshape(f.shape)

    def integrate(self, f: np.ndarray) -> np.ndarray:
        return np.tensordot(self.weights, f, axes=(0, 0))


def _nested(grid: SimplexGrid, factors: list[np.ndarray]) -> np.ndarray:
    """Nested simplex integral of the product basis; factors[l] has shape (nodes, cols_l)."""
    G = None
    for F in factors[:-1]:
        if G is None:
            integrand = F
        else:
            integrand = G[..., None] * F.reshape((F.shape[0],) + (1,) * (G.ndim - 1) + (F.shape[1],))
        G = grid.cumulative(integrand)
    last = factors[-1]
    if G is None:
        return grid.integrate(last)
    G2 = G.reshape(G.shape[0], -1)
    out = np.einsum("a,ai,az->iz", grid.weights, G2, last)
    return out.reshape(G.shape[1:] + (last.shape[1],))


def _grid_for(ks: KernelSpec, basis: BasisKind, jmax: int, n: int, panel_factor: int = 1) -> SimplexGrid:
    panels = panel_count(basis, jmax) * panel_factor
    return SimplexGrid.build(ks.iv, n, panels, ks.knots())


def _coefficient_block(ks: KernelSpec, trunc: Sequence[int], basis: BasisKind, n: int, panel_factor: int = 1):
    jmax = max(trunc)
    grid = _grid_for(ks, basis, jmax, n, panel_factor)
    Phi = basis_matrix(basis, jmax, grid.nodes, ks.iv)  # (jmax+1, nodes)
    factors = [w(grid.nodes, ks.iv)[:, None] * Phi[: p + 1].T for w, p in zip(ks.weights, trunc)]
    return _nested(grid, factors)


def _checked(compute, degree: int) -> np.ndarray:
    """Evaluate at ``degree`` and at twice the resolution; fail on disagreement."""
    coarse = compute(degree, 1)
    if 2 * degree <= MAX_GAUSS_POINTS:
        fine = compute(2 * degree, 1)
    else:
        fine = compute(degree, 2)
    diff = float(np.max(np.abs(fine - coarse))) if np.size(fine) else 0.0
    if not diff <= DEGREE_CHECK_TOL:
        raise QuadratureError(
            f"quadrature degree {degree} insufficient: refinement changed values by {diff:.3g}")
    return fine


def _check_quadrature_order(k: int):
    if k > MAX_QUADRATURE_ORDER:
        raise DomainError(f"direct quadrature supports k <= {MAX_QUADRATURE_ORDER}, got {k}")


def fourier_coefficient(ks: KernelSpec, jx: Sequence[int], basis: BasisKind = BasisKind.LEGENDRE,
                        degree: int = DEFAULT_DEGREE) -> float:
    """One coefficient C[j_1, ..., j_k] by nested Gauss-Legendre quadrature.

    ``degree`` is the number of Gauss points per panel. It must be at least
    2 (max j + 2), and the result is checked against a run at twice the
    resolution; a change above 1e-8 raises QuadratureError.
    """
    jx = tuple(int(j) for j in jx)
    if len(jx) != ks.k:
        raise DomainError(f"j-index has length {len(jx)}, kernel has k={ks.k}")
    if any(j < 0 for j in jx):
        raise DomainError(f"basis indices must be nonnegative, got {jx}")
    _check_quadrature_order(ks.k)
    if degree < 2 * (max(jx) + 2):
        raise DomainError(f"degree {degree} below the minimum 2*(max j + 2) = {2 * (max(jx) + 2)}")

    def compute(n, panel_factor):
        return _coefficient_block(ks, jx, basis, n, panel_factor)[tuple(jx)]

    return float(_checked(compute, degree))


def kernel_l2_norm_sq(ks: KernelSpec, degree: int = DEFAULT_DEGREE) -> float:
    """Squared L2 norm of K over [t, T]^k, i.e. the simplex integral of prod psi_l^2."""
    _check_quadrature_order(ks.k)

    def compute(n, panel_factor):
        grid = SimplexGrid.build(ks.iv, n, panel_factor, ks.knots())
        factors = [(w(grid.nodes, ks.iv) ** 2)[:, None] for w in ks.weights]
        return _nested(grid, factors).ravel()[0]

    return float(_checked(compute, degree))


# --------------------------------------------------------------------------
# tensors


@dataclass(frozen=True, eq=False)
class CoefficientTensor:
    values: np.ndarray
    basis: BasisKind
    iv: Interval
    weights: tuple[dict, ...] | None = None

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim < 1:
            raise DomainError("coefficient tensor must have at least one axis")
        if not np.all(np.isfinite(vals)):
            raise DomainError("coefficient tensor has non-finite entries")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def k(self) -> int:
        return self.values.ndim

    @property
    def truncation(self) -> tuple[int, ...]:
        return tuple(s - 1 for s in self.values.shape)

    def sum_sq(self) -> float:
        return float(np.sum(self.values**2))

    def scaled(self, factor: float) -> "CoefficientTensor":
        return CoefficientTensor(self.values * factor, self.basis, self.iv, self.weights)

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "basis": self.basis.value,
            "interval": [self.iv.t, self.iv.T],
            "k": self.k,
            "truncation": list(self.truncation),
            "weights": list(self.weights) if self.weights is not None else None,
            "values": self.values.ravel().tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CoefficientTensor":
        if d.get("format_version") != FORMAT_VERSION:
            raise DomainError(f"unsupported tensor format version {d.get('format_version')!r}")
        shape = tuple(p + 1 for p in d["truncation"])
        if len(shape) != d["k"]:
            raise DomainError("tensor archive: k does not match truncation length")
        values = np.asarray(d["values"], dtype=float)
        if values.size != math.prod(shape):
            raise DomainError("tensor archive: value count does not match truncation")
        weights = tuple(d["weights"]) if d.get("weights") is not None else None
        return cls(values.reshape(shape), BasisKind(d["basis"]), Interval(*d["interval"]), weights)

    def save(self, path) -> None:
        from .io import dumps
        Path(path).write_text(dumps(self.to_dict()) + "\n")

    @classmethod
    def load(cls, path) -> "CoefficientTensor":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class GeneralKernel:
    """A kernel Phi in L2([t, T]^k) given either by a factorized KernelSpec or
    by a precomputed coefficient tensor."""

    k: int
    source: Union[KernelSpec, CoefficientTensor]

    def __post_init__(self):
        if self.source.k != self.k:
            raise DomainError(f"kernel source has k={self.source.k}, expected {self.k}")


def _check_truncation(trunc: Sequence[int], k: int) -> tuple[int, ...]:
    trunc = tuple(int(p) for p in trunc)
    if len(trunc) != k:
        raise DomainError(f"truncation has {len(trunc)} entries, expected k={k}")
    if any(p < 0 for p in trunc):
        raise DomainError(f"truncation entries must be nonnegative, got {trunc}")
    if math.prod(p + 1 for p in trunc) > MAX_TENSOR_ENTRIES:
        raise MemoryBudgetError(f"tensor with truncation {trunc} exceeds {MAX_TENSOR_ENTRIES} entries")
    return trunc


def auto_degree(trunc: Sequence[int]) -> int:
    return max(DEFAULT_DEGREE, 2 * (max(trunc) + 2))


def build_tensor(kernel: Union[KernelSpec, GeneralKernel], truncation: Sequence[int],
                 basis: BasisKind = BasisKind.LEGENDRE, degree: int | None = None) -> CoefficientTensor:
    """Dense tensor of all coefficients with j_l <= p_l.

    With ``degree=None`` the quadrature degree starts from ``auto_degree`` and
    is doubled (up to the Gauss rule cap) until the refinement check passes.
    """
    if isinstance(kernel, GeneralKernel):
        src = kernel.source
        if isinstance(src, CoefficientTensor):
            trunc = _check_truncation(truncation, kernel.k)
            if src.truncation != trunc:
                raise DomainError(f"supplied tensor has truncation {src.truncation}, requested {trunc}")
            return src
        kernel = src
    ks = kernel
    trunc = _check_truncation(truncation, ks.k)
    _check_quadrature_order(ks.k)

    def compute(n, panel_factor):
        return _coefficient_block(ks, trunc, basis, n, panel_factor)

    if degree is not None:
        if degree < 2 * (max(trunc) + 2):
            raise DomainError(f"degree {degree} below the minimum 2*(max p + 2) = {2 * (max(trunc) + 2)}")
        values = _checked(compute, degree)
    else:
        degree = auto_degree(trunc)
        while True:
            try:
                values = _checked(compute, degree)
                break
            except QuadratureError:
                if 2 * degree > MAX_GAUSS_POINTS:
                    raise
                degree *= 2
    return CoefficientTensor(values, basis, ks.iv, tuple(w.descriptor() for w in ks.weights))


def truncation_residual(ks: KernelSpec, tensor: CoefficientTensor, degree: int = DEFAULT_DEGREE) -> float:
    """Parseval residual ||K||^2 - sum C^2 = ||K - K_p||^2 in L2([t, T]^k)."""
    if tensor.k != ks.k:
        raise DomainError(f"tensor has k={tensor.k}, kernel has k={ks.k}")
    return kernel_l2_norm_sq(ks, degree) - tensor.sum_sq()
