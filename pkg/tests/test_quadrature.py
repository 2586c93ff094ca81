import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from u2casimir.errors import QuadratureError
from u2casimir.quadrature import (adaptive_gl, gauss_legendre, gauss_legendre_fixed,
                                  integrate_quadpack, integrate_semi_infinite)


@pytest.mark.parametrize("n", [2, 8, 16, 32, 64])
def test_rule_exact_for_polynomials(n):
    x, w = gauss_legendre(n)
    assert w.sum() == pytest.approx(2.0, rel=1e-14)
    deg = 2 * n - 1
    assert np.sum(w * x ** (deg - 1)) == pytest.approx(2.0 / deg, rel=1e-12)


def test_fixed_rule_on_interval():
    val, _ = gauss_legendre_fixed(math.cos, 0.0, math.pi / 2, 16)
    assert val == pytest.approx(1.0, abs=1e-15)


def test_adaptive_handles_endpoint_singularity():
    val, err, _ = adaptive_gl(np.sqrt, 0.0, 1.0, 1e-12, grade=12)
    assert val == pytest.approx(2.0 / 3.0, abs=1e-12)


@given(st.floats(0.2, 20), st.integers(0, 4))
@settings(max_examples=30, deadline=None)
def test_gamma_integrals(rate, n):
    q = integrate_semi_infinite(lambda k: k ** n * np.exp(-rate * k), rate, power=n, rtol=1e-13)
    exact = math.factorial(n) / rate ** (n + 1)
    assert q.value == pytest.approx(exact, rel=1e-11)
    assert abs(q.value - exact) <= max(q.abs_error, 1e-12 * exact) * 10


@pytest.mark.parametrize("L", [0.25, 1.0, 4.0])
def test_bose_integral(L):
    q = integrate_semi_infinite(lambda k: k / np.expm1(2 * k * L), 2 * L)
    assert q.value == pytest.approx(math.pi ** 2 / (24 * L * L), rel=1e-12)


def test_noise_estimate_is_honoured():
    # noisy samples still integrate to within the declared noise level
    rng = np.random.default_rng(1)

    def f(k):
        noise = 1e-9 * np.exp(-k)
        return k * np.exp(-k) + noise * rng.uniform(-1, 1, np.shape(k)), noise

    q = integrate_semi_infinite(f, 1.0)
    assert q.value == pytest.approx(1.0, abs=1e-8)


def test_truncation_point_recorded():
    q = integrate_semi_infinite(lambda k: np.exp(-k), 1.0, power=0)
    assert 10 <= q.k_truncation < 60 and q.n_evaluations > 0


def test_non_decaying_integrand_rejected():
    with pytest.raises(QuadratureError):
        integrate_semi_infinite(lambda k: 1.0 / (1.0 + k * k), 1.0, power=0)


def test_quadpack_route():
    q = integrate_quadpack(lambda k: k * np.exp(-k))
    assert q.value == pytest.approx(1.0, rel=1e-11)
