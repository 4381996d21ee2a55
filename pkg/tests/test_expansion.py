import itertools
import math

import numpy as np
import pytest

from itoseries.basis import BasisKind, Interval
from itoseries.coefficients import CoefficientTensor, KernelSpec, build_tensor, kernel_l2_norm_sq
from itoseries.errors import DomainError
from itoseries.expansion import (
    GaussianTable,
    approximate_integral,
    mse_estimate,
    partition_monomials,
    sample_table,
    term,
    term_hermite,
    term_partition,
    term_recurrence,
)

from explicit_forms import EXPLICIT, as_set, evaluate

FORMS = (term_partition, term_hermite, term_recurrence)


def table_with(values, m=2, p=2):
    """Table whose random rows are set from ``values`` keyed by (i, j)."""
    tab = sample_table(0, m, p)
    vals = tab.values.copy()
    for (i, j), v in values.items():
        vals[i, j] = v
    return GaussianTable(vals, tab.basis, tab.iv)


def test_time_row_values():
    tab = sample_table(1, 1, 3)
    assert tab.value(0, 0) == pytest.approx(1.0)
    assert tab.value(0, 3) == 0.0
    tab = sample_table(1, 1, 0, iv=Interval(0, 4))
    assert tab.value(0, 0) == pytest.approx(2.0)


def test_sample_table_prefix_and_determinism():
    a = sample_table(42, 2, 3)
    b = sample_table(42, 3, 6)
    assert np.array_equal(a.values, b.values[:3, :4])
    assert np.array_equal(a.values, sample_table(42, 2, 3).values)
    assert not np.array_equal(a.values[1:], sample_table(43, 2, 3).values[1:])
    batch = sample_table(42, 2, 3, batch=5)
    assert batch.batch_shape == (5,)
    assert np.all(batch.values[0, 0] == 1.0)


def test_sample_table_mean():
    n = 10**5
    draws = sample_table(9, 1, 0, batch=n).values[1, 0]
    assert abs(draws.mean()) < 4 / math.sqrt(n)
    assert abs(draws.var() - 1) < 5 * math.sqrt(2 / n)


def test_printed_term_values():
    z = 1.7
    tab = table_with({(1, 1): z, (2, 2): -0.4})
    for fn in FORMS:
        assert fn((1,), (1,), tab) == pytest.approx(z)
        assert fn((1, 1), (1, 1), tab) == pytest.approx(z * z - 1)
        assert fn((1, 2), (1, 2), tab) == pytest.approx(-0.4 * z)
        assert fn((0, 0), (0, 0), tab) == pytest.approx(1.0)
    t3 = sample_table(3, 3, 1)
    zs = [t3.value(i, 1) for i in (1, 2, 3)]
    for fn in FORMS:
        assert fn((1, 2, 3), (1, 1, 1), t3) == pytest.approx(math.prod(zs))


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_partition_structure_matches_explicit(k):
    assert as_set(partition_monomials(k)) == EXPLICIT[k]


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_forms_match_explicit_evaluation(k):
    tab = sample_table(17, 2, 1)
    for mi in itertools.product(range(3), repeat=k):
        for jx in itertools.product(range(2), repeat=k):
            zeta = [tab.value(i, j) for i, j in zip(mi, jx)]
            want = evaluate(k, mi, jx, zeta)
            for fn in FORMS:
                got = fn(mi, jx, tab)
                assert got == pytest.approx(want, rel=1e-10, abs=1e-10), (fn.__name__, mi, jx)


def test_random_cases_k6():
    tab = sample_table(5, 2, 2)
    rng = np.random.default_rng(11)
    for _ in range(300):
        mi = tuple(rng.integers(0, 3, 6))
        jx = tuple(rng.integers(0, 3, 6))
        a, b, c = (fn(mi, jx, tab) for fn in FORMS)
        scale = max(1.0, abs(a))
        assert abs(a - b) <= 1e-10 * scale and abs(a - c) <= 1e-10 * scale


def test_batched_evaluation_matches_scalar():
    tab = sample_table(8, 2, 2, batch=7)
    mi, jx = (1, 1, 2, 1), (0, 0, 1, 2)
    batched = term(mi, jx, tab, "partition")
    for s in range(7):
        single = GaussianTable(tab.values[..., s], tab.basis, tab.iv)
        assert batched[s] == pytest.approx(term_hermite(mi, jx, single))


@pytest.mark.slow
@pytest.mark.parametrize("mi,jx,target", [
    ((1, 1, 1), (0, 0, 0), 6.0),
    ((1, 1), (2, 2), 2.0),
    ((1, 2, 3), (0, 1, 2), 1.0),
    ((1, 1, 2), (0, 1, 0), 1.0),
])
def test_zero_mean_and_second_moment(mi, jx, target):
    n = 200_000
    tab = sample_table(2024, 3, 2, batch=n)
    x = term_hermite(mi, jx, tab)
    se = x.std(ddof=1) / math.sqrt(n)
    assert abs(x.mean()) <= 5 * se
    x2 = x**2
    assert abs(x2.mean() - target) <= 5 * x2.std(ddof=1) / math.sqrt(n)


def test_time_only_terms_deterministic():
    tab = sample_table(1, 1, 2, iv=Interval(0, 2), batch=3)
    v = term_recurrence((0, 0), (0, 0), tab)
    np.testing.assert_allclose(v, 2.0)


def test_approximate_integral_examples():
    ks1 = KernelSpec.uniform(1)
    t1 = build_tensor(ks1, (0,))
    tab = sample_table(77, 2, 0)
    assert approximate_integral(t1, (1,), tab) == pytest.approx(tab.value(1, 0))
    assert approximate_integral(t1, (0,), tab) == pytest.approx(1.0)
    t2 = build_tensor(KernelSpec.uniform(2), (0, 0))
    z = tab.value(1, 0)
    assert approximate_integral(t2, (1, 1), tab) == pytest.approx((z * z - 1) / 2)


def test_approximate_integral_linear_and_form_independent():
    ks = KernelSpec.uniform(3)
    t = build_tensor(ks, (2, 2, 2))
    tab = sample_table(3, 2, 2, batch=4)
    base = approximate_integral(t, (1, 2, 1), tab)
    for form in ("partition", "recurrence"):
        np.testing.assert_allclose(approximate_integral(t, (1, 2, 1), tab, form), base, rtol=1e-12, atol=1e-13)
    np.testing.assert_allclose(approximate_integral(t.scaled(-2.5), (1, 2, 1), tab), -2.5 * base, rtol=1e-12)
    other = CoefficientTensor(np.ones((3, 3, 3)), t.basis, t.iv)
    summed = CoefficientTensor(t.values + other.values, t.basis, t.iv)
    np.testing.assert_allclose(approximate_integral(summed, (1, 2, 1), tab),
                               base + approximate_integral(other, (1, 2, 1), tab), rtol=1e-12, atol=1e-12)


def test_approximate_integral_errors():
    t = build_tensor(KernelSpec.uniform(2), (3, 3))
    with pytest.raises(DomainError):
        approximate_integral(t, (1,), sample_table(1, 1, 3))
    with pytest.raises(DomainError):
        approximate_integral(t, (1, 1), sample_table(1, 1, 2))
    with pytest.raises(DomainError):
        approximate_integral(t, (1, 1), sample_table(1, 1, 3, BasisKind.TRIGONOMETRIC))
    with pytest.raises(DomainError):
        approximate_integral(t, (1, 3), sample_table(1, 2, 3))
    with pytest.raises(DomainError):
        approximate_integral(t, (1, 1), sample_table(1, 1, 3), form="bogus")


def test_mse_estimate():
    ks = KernelSpec.uniform(2)
    norm = kernel_l2_norm_sq(ks)
    est = mse_estimate(build_tensor(ks, (0, 0)), (1, 2), norm)
    assert est.value == pytest.approx(0.25, abs=1e-12) and est.exact
    assert not mse_estimate(build_tensor(ks, (0, 0)), (1, 1), norm).exact
    seq = [mse_estimate(build_tensor(ks, (p, p)), (1, 2), norm).value for p in (0, 1, 2, 4, 8)]
    assert all(b < a for a, b in zip(seq, seq[1:]))
    ks1 = KernelSpec.uniform(1)
    assert mse_estimate(build_tensor(ks1, (0,)), (1,), kernel_l2_norm_sq(ks1)).value == pytest.approx(0, abs=1e-12)
    with pytest.raises(DomainError):
        mse_estimate(build_tensor(ks, (0, 0)), (1, 2), 0.1)
