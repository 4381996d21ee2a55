import math

import numpy as np
import pytest

from itoseries.basis import BasisKind, Interval
from itoseries.coefficients import Constant, KernelSpec, PowerOfElapsed, build_tensor
from itoseries.errors import DomainError
from itoseries.oracle import (
    WienerPath,
    convergence_curve,
    coupled_mse,
    discrete_expected_mse_k2,
    discretized_iterated_integral,
    simulate_path,
    simulate_paths,
    table_from_path,
    zeta_from_path,
)

LEG = BasisKind.LEGENDRE


def brute_force_double(path, mi, weights):
    """O(N^2) strictly-lower-triangular double sum."""
    tau = path.grid
    a = weights[0](tau, path.iv) * path.component(mi[0])
    b = weights[1](tau, path.iv) * path.component(mi[1])
    total = 0.0
    for s in range(path.N):
        total += b[s] * a[:s].sum()
    return total


def test_single_step_path():
    p = simulate_path(1, 2, 1)
    assert p.increments.shape == (2, 1)


def test_increment_sum_variance():
    iv = Interval(0, 2)
    w = simulate_paths(5, range(10_000), 1, 8, iv).increments.sum(axis=1)[0]
    se = w.var(ddof=1) * math.sqrt(2 / len(w))
    assert abs(w.var(ddof=1) - 2.0) <= 5 * se
    assert abs(w.mean()) <= 5 * w.std() / math.sqrt(len(w))


def test_first_order_integrals_exact():
    iv = Interval(0.5, 1.75)
    p = simulate_path(3, 2, 500, iv)
    ks = KernelSpec.uniform(1, iv=iv)
    assert discretized_iterated_integral(p, (1,), ks) == pytest.approx(p.increments[0].sum(), abs=1e-13)
    assert discretized_iterated_integral(p, (0,), ks) == pytest.approx(1.25, abs=1e-13)


def test_double_integral_identity_and_brute_force():
    p = simulate_path(4, 2, 1000)
    dw = p.increments[0]
    ks = KernelSpec.uniform(2)
    got = discretized_iterated_integral(p, (1, 1), ks)
    assert got == pytest.approx((dw.sum() ** 2 - (dw**2).sum()) / 2, abs=1e-12)
    assert got == pytest.approx(brute_force_double(p, (1, 1), ks.weights), abs=1e-12)
    ks = KernelSpec((PowerOfElapsed(1), Constant(2.0)))
    for mi in ((1, 2), (0, 1), (2, 0)):
        assert discretized_iterated_integral(p, mi, ks) == pytest.approx(
            brute_force_double(p, mi, ks.weights), abs=1e-12)


def test_batched_paths_match_single():
    ks = KernelSpec.uniform(3)
    batch = simulate_paths(9, [0, 1, 2], 3, 64)
    vals = discretized_iterated_integral(batch, (1, 2, 3), ks)
    for t in range(3):
        single = simulate_path(9, 3, 64, trial=t)
        assert vals[t] == pytest.approx(discretized_iterated_integral(single, (1, 2, 3), ks))


def test_zeta_examples():
    iv = Interval(0, 4)
    p = simulate_path(2, 1, 200, iv)
    assert zeta_from_path(p, LEG, 0, 1) == pytest.approx(p.increments[0].sum() / 2, abs=1e-13)
    assert zeta_from_path(p, LEG, 2, 0) == 0.0
    tab = table_from_path(p, LEG, 3)
    for j in range(4):
        assert tab.value(1, j) == pytest.approx(zeta_from_path(p, LEG, j, 1))


@pytest.mark.parametrize("basis", [LEG, BasisKind.TRIGONOMETRIC])
def test_zeta_unit_variance(basis):
    paths = simulate_paths(12, range(10_000), 1, 256)
    tab = table_from_path(paths, basis, 4)
    for j in range(5):
        z = tab.values[1, j]
        v = z.var(ddof=1)
        assert abs(v - 1.0) <= 5 * v * math.sqrt(2 / len(z))


def test_symmetrized_k2_term_identity():
    # J^{(12)} + J^{(21)} = dw1 * dw2 on the discrete grid as well
    p = simulate_path(6, 2, 300)
    ks = KernelSpec.uniform(2)
    s = discretized_iterated_integral(p, (1, 2), ks) + discretized_iterated_integral(p, (2, 1), ks)
    assert s == pytest.approx(p.increments[0].sum() * p.increments[1].sum() - (p.increments[0] * p.increments[1]).sum())


def test_argument_errors():
    with pytest.raises(DomainError):
        simulate_path(1, 1, 0)
    with pytest.raises(DomainError):
        simulate_path(1, 0, 10)
    p = simulate_path(1, 1, 10)
    with pytest.raises(DomainError):
        discretized_iterated_integral(p, (1,), KernelSpec.uniform(2))
    with pytest.raises(DomainError):
        discretized_iterated_integral(p, (1,), KernelSpec.uniform(1, iv=Interval(0, 2)))
    with pytest.raises(DomainError):
        p.component(3)
    with pytest.raises(DomainError):
        coupled_mse((1,), KernelSpec.uniform(1), build_tensor(KernelSpec.uniform(1), (0,)), 10, 50, 0)


def test_k1_exact_expansion():
    ks = KernelSpec.uniform(1)
    st = coupled_mse((1,), ks, build_tensor(ks, (0,)), N=500, trials=200, seed=3)
    assert st.sample_mse < 1e-25 and st.analytic_mse == pytest.approx(0, abs=1e-12)


def test_discrete_mse_matches_empirical():
    ks = KernelSpec.uniform(2)
    tensors = [build_tensor(ks, (p, p)) for p in (0, 2)]
    stats = convergence_curve((1, 2), ks, tensors, N=400, trials=2000, seed=8)
    for st, t in zip(stats, tensors):
        exact = discrete_expected_mse_k2(t, ks, 400)
        assert abs(st.sample_mse - exact) <= 5 * st.stderr
        assert abs(exact - st.analytic_mse) < 5e-3
    assert stats[1].sample_mse < stats[0].sample_mse


def test_path_components():
    p = WienerPath(np.ones((2, 4)), Interval(0, 2))
    assert p.dt == 0.5
    np.testing.assert_allclose(p.grid, [0, 0.5, 1, 1.5])
    np.testing.assert_allclose(p.component(0), 0.5)
