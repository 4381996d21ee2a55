import math

import numpy as np
import pytest

from itoseries.errors import DomainError
from itoseries.hermite import hermite, hermite2, hermite2_explicit, hermite_explicit


def test_printed_values():
    assert hermite(2, 0.0) == -1.0
    assert hermite(0, 3.7) == 1.0
    assert hermite(5, 1.0) == 6.0
    assert hermite2(2, 3.0, 2.0) == 7.0
    assert hermite2(4, 1.0, 1.0) == -2.0


def test_against_numpy_hermite_e():
    x = np.linspace(-5, 5, 41)
    for n in range(15):
        c = np.zeros(n + 1)
        c[n] = 1
        np.testing.assert_allclose(hermite(n, x), np.polynomial.hermite_e.hermeval(x, c), rtol=1e-12, atol=1e-9)


def test_explicit_sum_agrees_with_recurrence():
    rng = np.random.default_rng(0)
    x = rng.uniform(-5, 5, 200)
    for n in range(21):
        a = hermite(n, x)
        b = hermite_explicit(n, x)
        scale = np.maximum(1.0, np.abs(b))
        assert np.max(np.abs(a - b) / scale) < 1e-10


def test_two_argument_reduces_at_y1():
    rng = np.random.default_rng(1)
    x = rng.normal(size=30)
    for n in range(11):
        np.testing.assert_allclose(hermite2(n, x, 1.0), hermite(n, x), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("y", [0.25, 1.0, 4.0])
def test_scaling_identity(y):
    x = np.linspace(-3, 3, 25)
    for n in range(11):
        lhs = hermite2(n, x, y)
        rhs = y ** (n / 2) * hermite(n, x / math.sqrt(y))
        np.testing.assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-10)
        np.testing.assert_allclose(lhs, hermite2_explicit(n, x, y), rtol=1e-10, atol=1e-10)


def test_y_zero_gives_monomial():
    for n in range(8):
        assert hermite2(n, 1.7, 0.0) == pytest.approx(1.7**n)


def test_errors():
    with pytest.raises(DomainError):
        hermite(65, 0.0)
    with pytest.raises(DomainError):
        hermite(-1, 0.0)
    with pytest.raises(DomainError):
        hermite2(2, 1.0, -0.5)


@pytest.mark.slow
def test_gaussian_orthogonality():
    z = np.random.default_rng(2024).standard_normal(10**6)
    H = [hermite(n, z) for n in range(5)]
    for n in range(5):
        for m in range(5):
            prod = H[n] * H[m]
            mean = prod.mean()
            se = prod.std(ddof=1) / math.sqrt(len(z))
            target = math.factorial(n) if n == m else 0.0
            assert abs(mean - target) <= 5 * se, (n, m, mean, se)
