"""Brute-force ground truth on a fine uniform grid.

A simulated Wiener path gives (1) the left-point Riemann-Stieltjes value of
the iterated Ito integral and (2) the discrete coordinates
zeta_j^{(i)} = sum_l phi_j(tau_l) dw_l^{(i)}. Feeding (2) into the truncated
expansion and comparing with (1) on the same path measures the mean-square
truncation error directly. That comparison carries an O(1/N) discretization
component which is reported, not removed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .basis import BasisKind, Interval, UNIT, basis_matrix, integrate_basis
from .coefficients import CoefficientTensor, KernelSpec, kernel_l2_norm_sq
from .combinatorics import MAX_ORDER
from .errors import DomainError
from .expansion import GaussianTable, approximate_integral, mse_estimate, time_row

MAX_GRID = 10**7
TRIAL_BLOCK = 256


@dataclass(frozen=True, eq=False)
class WienerPath:
    """Increments of an m-dimensional Wiener process on the uniform grid
    tau_l = t + l (T - t) / N.

    ``increments[i - 1, l]`` is w^{(i)}(tau_{l+1}) - w^{(i)}(tau_l); trailing
    axes, when present, index independent paths.
    """

    increments: np.ndarray
    iv: Interval = UNIT

    @property
    def m(self) -> int:
        return self.increments.shape[0]

    @property
    def N(self) -> int:
        return self.increments.shape[1]

    @property
    def dt(self) -> float:
        return self.iv.length / self.N

    @property
    def grid(self) -> np.ndarray:
        return self.iv.t + self.dt * np.arange(self.N)

    def component(self, i: int) -> np.ndarray:
        """Increments of component i, with i = 0 the time increments."""
        if i == 0:
            return np.full(self.increments.shape[1:], self.dt)
        if not 1 <= i <= self.m:
            raise DomainError(f"component {i} outside 0..{self.m}")
        return self.increments[i - 1]


def path_rng(seed: int, trial: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(trial),)))


def simulate_path(seed: int, m: int, N: int, iv: Interval = UNIT, trial: int = 0) -> WienerPath:
    if not 1 <= N <= MAX_GRID:
        raise DomainError(f"grid size N must be in [1, {MAX_GRID}], got {N}")
    if m < 1:
        raise DomainError(f"Wiener dimension must be >= 1, got {m}")
    z = path_rng(seed, trial).standard_normal((m, N))
    return WienerPath(z * math.sqrt(iv.length / N), iv)


def simulate_paths(seed: int, trials: Sequence[int], m: int, N: int, iv: Interval = UNIT) -> WienerPath:
    """Paths for the given trial numbers, stacked on a trailing batch axis."""
    incs = np.stack([simulate_path(seed, m, N, iv, t).increments for t in trials], axis=-1)
    return WienerPath(incs, iv)


def discretized_iterated_integral(path: WienerPath, mi: Sequence[int], ks: KernelSpec):
    """Left-point nested sum over the grid, in O(N k).

    S_1(l) = sum_{r<l} psi_1(tau_r) dw_r^{(i_1)},
    S_q(l) = sum_{r<l} psi_q(tau_r) S_{q-1}(r) dw_r^{(i_q)},
    and the result is S_k(N).
    """
    mi = tuple(int(i) for i in mi)
    if len(mi) != ks.k:
        raise DomainError(f"multi-index length {len(mi)} differs from kernel k={ks.k}")
    if len(mi) > MAX_ORDER:
        raise DomainError(f"multiplicity {len(mi)} exceeds cap {MAX_ORDER}")
    if ks.iv != path.iv:
        raise DomainError("kernel and path live on different intervals")
    tau = path.grid
    extra = path.increments.ndim - 2
    prev = None
    for w, i in zip(ks.weights, mi):
        psi = w(tau, ks.iv).reshape((-1,) + (1,) * extra)
        g = psi * path.component(i)
        if prev is not None:
            g = g * prev
        S = np.cumsum(g, axis=0)
        # value strictly before each grid point
        prev = np.concatenate([np.zeros((1,) + S.shape[1:]), S[:-1]], axis=0)
        total = S[-1]
    return total if np.ndim(total) else float(total)


def zeta_from_path(path: WienerPath, basis: BasisKind, j: int, i: int):
    if not 0 <= i <= path.m:
        raise DomainError(f"component {i} outside 0..{path.m}")
    if i == 0:
        return integrate_basis(basis, j, path.iv)
    phi = basis_matrix(basis, j, path.grid, path.iv)[j]
    val = np.tensordot(phi, path.increments[i - 1], axes=(0, 0))
    return val if np.ndim(val) else float(val)


def table_from_path(path: WienerPath, basis: BasisKind, p: int) -> GaussianTable:
    """All zeta_j^{(i)} for j <= p on one path (or a batch of paths)."""
    Phi = basis_matrix(basis, p, path.grid, path.iv)  # (p+1, N)
    rows = np.einsum("jn,in...->ij...", Phi, path.increments)
    row0 = time_row(basis, p, path.iv).reshape((1, p + 1) + (1,) * (rows.ndim - 2))
    row0 = np.broadcast_to(row0, (1,) + rows.shape[1:])
    return GaussianTable(np.concatenate([row0, rows], axis=0), basis, path.iv)


@dataclass(frozen=True)
class CoupledStats:
    """Outcome of a coupled oracle-versus-expansion experiment."""

    truncation: tuple[int, ...]
    sample_mse: float
    stderr: float
    analytic_mse: float
    analytic_exact: bool
    correlation: float
    oracle_second_moment: float
    oracle_second_moment_stderr: float
    n_grid: int
    trials: int


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    return float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(len(x)))


def coupled_samples(mi: Sequence[int], ks: KernelSpec, tensors: Sequence[CoefficientTensor],
                    N: int, trials: int, seed: int, form: str = "hermite"):
    """Oracle values (trials,) and approximations (len(tensors), trials) on shared paths.

    Trial ``n`` always uses the path ``simulate_path(seed, m, N, iv, trial=n)``.
    """
    mi = tuple(int(i) for i in mi)
    if not tensors:
        raise DomainError("at least one tensor is required")
    basis = tensors[0].basis
    if any(t.basis is not basis for t in tensors):
        raise DomainError("tensors must share a basis")
    m = max(max(mi), 1)
    pmax = max(max(t.truncation) for t in tensors)
    oracle = np.empty(trials)
    approx = np.empty((len(tensors), trials))
    for start in range(0, trials, TRIAL_BLOCK):
        block = range(start, min(start + TRIAL_BLOCK, trials))
        path = simulate_paths(seed, block, m, N, ks.iv)
        oracle[start:block.stop] = discretized_iterated_integral(path, mi, ks)
        tab = table_from_path(path, basis, pmax)
        for n, tensor in enumerate(tensors):
            approx[n, start:block.stop] = approximate_integral(tensor, mi, tab, form)
    return oracle, approx


def coupled_mse(mi: Sequence[int], ks: KernelSpec, tensor: CoefficientTensor, N: int, trials: int,
                seed: int, form: str = "hermite") -> CoupledStats:
    return convergence_curve(mi, ks, [tensor], N, trials, seed, form)[0]


def convergence_curve(mi: Sequence[int], ks: KernelSpec, tensors: Sequence[CoefficientTensor], N: int,
                      trials: int, seed: int, form: str = "hermite") -> list[CoupledStats]:
    """Coupled MSE for several truncations, all measured on the same paths."""
    if trials < 100:
        raise DomainError(f"coupled_mse needs at least 100 trials, got {trials}")
    oracle, approx = coupled_samples(mi, ks, tensors, N, trials, seed, form)
    norm_sq = kernel_l2_norm_sq(ks)
    m2, m2_se = _mean_se(oracle**2)
    out = []
    for tensor, a in zip(tensors, approx):
        mean, se = _mean_se((a - oracle) ** 2)
        est = mse_estimate(tensor, mi, norm_sq)
        corr = float(np.corrcoef(a, oracle)[0, 1]) if np.std(a) > 0 else 0.0
        out.append(CoupledStats(tensor.truncation, mean, se, est.value, est.exact, corr, m2, m2_se, N, trials))
    return out


def discrete_expected_mse_k2(tensor: CoefficientTensor, ks: KernelSpec, N: int) -> float:
    """E[(oracle - approximation)^2] on an N-step grid, for k = 2 and two
    distinct nonzero components, computed exactly.

    Both quantities are bilinear in the increments, so the error is
    sum_{r,s} (D[r, s] - K_p(tau_r, tau_s))^2 dt^2 where D is the discrete
    left-point kernel. Used to quantify the O(1/N) bias of ``coupled_mse``.
    """
    if tensor.k != 2 or ks.k != 2:
        raise DomainError("exact discrete MSE is implemented for k = 2 only")
    path_iv = ks.iv
    dt = path_iv.length / N
    tau = path_iv.t + dt * np.arange(N)
    p1, p2 = tensor.truncation
    Phi = basis_matrix(tensor.basis, max(p1, p2), tau, path_iv)
    a = ks.weights[0](tau, path_iv)
    b = ks.weights[1](tau, path_iv)
    A = Phi[: p1 + 1]  # (p1+1, N)
    B = Phi[: p2 + 1]
    C = tensor.values
    # D[r, s] = a_r b_s [r < s]
    d_sq = np.sum(a**2 * (np.cumsum((b**2)[::-1])[::-1] - b**2))
    # cross = sum_{r<s} a_r b_s Kp(r, s), Kp(r, s) = A[:, r]^T C B[:, s]
    U = a[None, :] * A  # (p1+1, N)
    V = b[None, :] * B
    prefix = np.cumsum(U, axis=1) - U  # sum_{r<s} U[:, r]
    cross = np.einsum("is,ij,js->", prefix, C, V)
    gram_a = A @ A.T
    gram_b = B @ B.T
    kp_sq = np.einsum("ij,ik,jl,kl->", C, gram_a, gram_b, C)
    return float((d_sq - 2.0 * cross + kp_sq) * dt**2)
