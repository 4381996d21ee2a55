"""Strong Euler-Maruyama and Milstein integration driven by the expansions.

Milstein needs the double Ito integrals J^{(i1 i2)} over each step for
every pair of noise components. They are taken from ``approximate_integral``
with unit weights, using one GaussianTable per step; the table's zeta_0 row
also supplies the Wiener increments (dw^{(i)} = sqrt(h) zeta_0^{(i)} since
phi_0 = 1/sqrt(h) on a step of length h).

States are arrays of shape (n, B): component first, independent paths last.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .basis import BasisKind, Interval, UNIT
from .coefficients import KernelSpec, build_tensor
from .errors import DomainError, ItoSeriesError
from .expansion import GaussianTable, approximate_integral, sample_table
from .oracle import WienerPath, simulate_paths, table_from_path


class Scheme(enum.Enum):
    EULER = "euler"
    MILSTEIN = "milstein"


@dataclass(frozen=True)
class SdeSystem:
    """dx = a(x, t) dt + sum_j B_j(x, t) dw^{(j)}.

    ``diffusion`` returns shape (n, m, B); ``milstein`` returns the
    (n, m, m, B) array whose [:, j1, j2] slice is L^{j1} B_{j2}
    = (dB_{j2}/dx) B_{j1}, the coefficient of J^{(j1 j2)}.
    """

    name: str
    n: int
    m: int
    drift: Callable
    diffusion: Callable
    milstein: Callable
    commutative: bool = False
    exact: Optional[Callable] = None  # (x0, W_T of shape (m, B), elapsed) -> x_T


def linear_system(name: str, A, Bs, commutative: bool | None = None) -> SdeSystem:
    """dx = A x dt + sum_j B_j x dw^{(j)} with constant matrices."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    Bs = np.asarray([np.atleast_2d(np.asarray(B, dtype=float)) for B in Bs])  # (m, n, n)
    n, m = A.shape[0], Bs.shape[0]
    # BB[j2, j1] = B_{j2} B_{j1}
    BB = np.einsum("aik,bkj->abij", Bs, Bs)
    if commutative is None:
        commutative = bool(np.allclose(BB, BB.transpose(1, 0, 2, 3)))

    def drift(x, t):
        return A @ x

    def diffusion(x, t):
        return np.einsum("jik,kb->ijb", Bs, x)

    def milstein(x, t):
        return np.einsum("cdik,kb->idcb", BB, x)

    return SdeSystem(name, n, m, drift, diffusion, milstein, commutative)


def linear_scalar_2noise(a: float = 0.5, b1: float = 0.6, b2: float = 0.8) -> SdeSystem:
    """Scalar geometric Brownian motion driven by two noises (commutative)."""
    base = linear_system("scalar2", [[a]], [[[b1]], [[b2]]], commutative=True)

    def exact(x0, W, elapsed):
        expo = (a - 0.5 * (b1**2 + b2**2)) * elapsed + b1 * W[0] + b2 * W[1]
        return np.asarray(x0, dtype=float).reshape(1, -1) * np.exp(expo)

    return SdeSystem(base.name, 1, 2, base.drift, base.diffusion, base.milstein, True, exact)


# rotation drift; the diffusion commutator B1 B2 - B2 B1 = 0.09 diag(1, -1)
BILINEAR_A = [[0.0, 1.0], [-1.0, 0.0]]
BILINEAR_B1 = [[0.3, 0.3], [0.0, 0.3]]
BILINEAR_B2 = [[0.3, 0.0], [0.3, 0.3]]


def bilinear_noncommutative_2d() -> SdeSystem:
    """2-d bilinear system whose diffusion matrices do not commute."""
    return linear_system("bilinear2d", BILINEAR_A, [BILINEAR_B1, BILINEAR_B2], commutative=False)


CATALOG = {
    "scalar2": linear_scalar_2noise,
    "bilinear2d": bilinear_noncommutative_2d,
}


def catalog_system(name: str) -> SdeSystem:
    try:
        return CATALOG[name]()
    except KeyError:
        raise DomainError(f"unknown system {name!r}; expected one of {sorted(CATALOG)}") from None


@dataclass(frozen=True)
class SchemeConfig:
    scheme: Scheme
    h: float
    p: int = 0
    seed: int = 0
    basis: BasisKind = BasisKind.LEGENDRE

    def __post_init__(self):
        if isinstance(self.scheme, str):
            object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not self.h > 0:
            raise DomainError(f"step must be positive, got {self.h}")
        if self.p < 0:
            raise DomainError(f"truncation must be nonnegative, got {self.p}")

    def steps(self, iv: Interval) -> int:
        ratio = iv.length / self.h
        steps = round(ratio)
        if steps < 1 or abs(ratio - steps) > 1e-9 * max(1.0, ratio):
            raise DomainError(f"step {self.h} does not divide the interval length {iv.length}")
        return steps


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (steps + 1, n, B)

    @property
    def terminal(self) -> np.ndarray:
        return self.states[-1]


def step_seed(seed: int, step: int) -> int:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(step),))
    return int(ss.generate_state(1, np.uint64)[0])


def _double_integrals(tensor, tab: GaussianTable, m: int) -> np.ndarray:
    out = np.empty((m, m) + tab.batch_shape)
    for a in range(1, m + 1):
        for b in range(1, m + 1):
            out[a - 1, b - 1] = approximate_integral(tensor, (a, b), tab)
    return out


def integrate(system: SdeSystem, cfg: SchemeConfig, x0, iv: Interval = UNIT, trials: int = 1,
              noise: WienerPath | None = None) -> Trajectory:
    """Integrate ``trials`` paths from ``x0`` over ``iv``.

    Without ``noise`` every step draws an independent GaussianTable seeded
    from (cfg.seed, step). With ``noise`` (a fine path batch whose grid
    refines the step) the tables are the discrete zeta coordinates of that
    path over each step, which couples runs at different step sizes.
    """
    steps = cfg.steps(iv)
    h = iv.length / steps
    x = np.asarray(x0, dtype=float).reshape(system.n, -1)
    if noise is not None:
        trials = noise.increments.shape[-1] if noise.increments.ndim > 2 else 1
        if noise.m != system.m or noise.iv != iv:
            raise DomainError("noise path does not match the system dimension or interval")
        if noise.N % steps:
            raise DomainError(f"noise grid of {noise.N} steps does not refine {steps} steps")
        sub = noise.N // steps
    x = np.broadcast_to(x, (system.n, trials)).copy()
    milstein = cfg.scheme is Scheme.MILSTEIN
    tensor = build_tensor(KernelSpec.uniform(2, iv=Interval(0.0, h)), (cfg.p, cfg.p), cfg.basis) if milstein else None
    times = iv.t + h * np.arange(steps + 1)
    states = np.empty((steps + 1, system.n, trials))
    states[0] = x
    sqrt_h = math.sqrt(h)
    for s in range(steps):
        t0 = times[s]
        step_iv = Interval(t0, t0 + h)
        if noise is None:
            tab = sample_table(step_seed(cfg.seed, s), system.m, cfg.p if milstein else 0, cfg.basis, step_iv,
                               batch=trials)
        else:
            incs = noise.increments[:, s * sub:(s + 1) * sub]
            if incs.ndim == 2:
                incs = incs[..., None]
            tab = table_from_path(WienerPath(incs, step_iv), cfg.basis, cfg.p if milstein else 0)
        dw = sqrt_h * tab.values[1:, 0]  # (m, B)
        x_new = x + system.drift(x, t0) * h + np.einsum("ijb,jb->ib", system.diffusion(x, t0), dw)
        if milstein:
            J = _double_integrals(tensor, GaussianTable(tab.values, cfg.basis, Interval(0.0, h)), system.m)
            x_new = x_new + np.einsum("icdb,cdb->ib", system.milstein(x, t0), J)
        if not np.all(np.isfinite(x_new)):
            raise ItoSeriesError(f"non-finite state at step {s} (t={t0:.6g}); reduce h")
        x = x_new
        states[s + 1] = x
    return Trajectory(times, states)


@dataclass(frozen=True)
class ErrorRow:
    h: float
    rmse: float
    stderr: float
    trials: int


def _rmse(diff_sq: np.ndarray, trials: int) -> tuple[float, float]:
    mse = float(np.mean(diff_sq))
    se_mse = float(np.std(diff_sq, ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    rmse = math.sqrt(mse)
    return rmse, (se_mse / (2.0 * rmse) if rmse > 0 else 0.0)


def strong_error(system: SdeSystem, cfgs: SchemeConfig | Sequence[SchemeConfig],
                 reference: SchemeConfig | str, trials: int, seed: int, x0=None,
                 iv: Interval = UNIT) -> list[ErrorRow]:
    """RMS terminal error of each config against a reference on coupled paths.

    ``reference`` is either a SchemeConfig (normally fine-step Euler), whose
    step must divide every coarse step, or ``"exact"`` for systems with a
    closed-form solution. All runs share one fine Brownian path per trial,
    drawn with step equal to the smallest step involved.
    """
    if isinstance(cfgs, SchemeConfig):
        cfgs = [cfgs]
    if trials < 2:
        raise DomainError("strong_error needs at least two trials")
    x0 = np.ones(system.n) if x0 is None else np.asarray(x0, dtype=float)
    steps = [c.steps(iv) for c in cfgs]
    if isinstance(reference, str):
        if reference != "exact" or system.exact is None:
            raise DomainError(f"system {system.name} has no exact solution")
        n_fine = math.lcm(*steps)
    else:
        n_fine = reference.steps(iv)
        if any(n_fine % s for s in steps):
            raise DomainError("reference step must divide every coarse step")
    path = simulate_paths(seed, range(trials), system.m, n_fine, iv)
    if isinstance(reference, str):
        W = path.increments.sum(axis=1)
        ref = system.exact(x0, W, iv.length)
    else:
        ref = integrate(system, reference, x0, iv, noise=path).terminal
    rows = []
    for cfg in cfgs:
        approx = integrate(system, cfg, x0, iv, noise=path).terminal
        diff_sq = np.sum((approx - ref) ** 2, axis=0)
        rmse, se = _rmse(diff_sq, trials)
        rows.append(ErrorRow(cfg.h, rmse, se, trials))
    return rows


def fitted_order(rows: Sequence[ErrorRow]) -> float:
    """Least-squares slope of log(rmse) against log(h)."""
    h = np.log([r.h for r in rows])
    e = np.log([r.rmse for r in rows])
    return float(np.polyfit(h, e, 1)[0])
