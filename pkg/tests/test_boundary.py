import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import findroot, exp as mpexp, mpf

from u2casimir.boundary import (BoundaryCondition, BoundaryParams, build_unitary, char_poly,
                                dirichlet, is_admissible, neumann, params_from_matrix,
                                quasi_periodic, random_admissible, random_params, robin)
from u2casimir.errors import ValidationError

angles = st.floats(-10, 10, allow_nan=False)
betas = st.floats(-math.pi / 2, math.pi / 2)
unit_vectors = st.tuples(*[st.floats(-1, 1)] * 3).filter(lambda v: 0.1 < np.linalg.norm(v)).map(
    lambda v: tuple(np.asarray(v) / np.linalg.norm(v)))


def test_dirichlet_and_neumann_matrices():
    assert np.allclose(dirichlet().u, -np.eye(2), atol=1e-15)
    assert np.allclose(neumann().u, np.eye(2), atol=1e-15)
    for n in [(1, 0, 0), (0, 1, 0), (0.6, 0, 0.8)]:
        assert np.allclose(build_unitary(BoundaryParams(math.pi, 0.0, n)).u, -np.eye(2), atol=1e-15)


@pytest.mark.parametrize("theta", [0.0, 0.4, math.pi / 3, 2.0, math.pi])
def test_quasi_periodic_from_angles(theta):
    built = build_unitary(BoundaryParams(1.5 * math.pi, 0.5 * math.pi, (math.cos(theta), -math.sin(theta), 0.0)))
    target = np.array([[0, np.exp(1j * theta)], [np.exp(-1j * theta), 0]])
    assert np.allclose(built.u, target, atol=1e-12)
    assert np.allclose(quasi_periodic(theta).u, target, atol=1e-15)


def test_unitarity_for_1000_random_parameter_sets(rng):
    for _ in range(1000):
        u = build_unitary(random_params(rng)).u
        assert np.max(np.abs(u.conj().T @ u - np.eye(2))) < 1e-10


@given(angles, betas, unit_vectors)
def test_sign_redundancy_of_beta_and_n(alpha, beta, n):
    a = build_unitary(BoundaryParams(alpha, beta, n)).u
    b = build_unitary(BoundaryParams(alpha, -beta, tuple(-c for c in n))).u
    assert np.max(np.abs(a - b)) < 1e-12


@given(angles, betas, unit_vectors)
def test_cached_det_and_trace(alpha, beta, n):
    bc = build_unitary(BoundaryParams(alpha, beta, n))
    assert abs(bc.det_u - np.linalg.det(bc.u)) < 1e-12
    assert abs(bc.tr_u - np.trace(bc.u)) < 1e-12


@given(angles, betas, unit_vectors)
def test_params_round_trip(alpha, beta, n):
    bc = build_unitary(BoundaryParams(alpha, beta, n))
    again = build_unitary(params_from_matrix(bc.u))
    assert np.max(np.abs(again.u - bc.u)) < 1e-10


def test_char_poly_is_det_of_z_minus_u(rng):
    for _ in range(200):
        bc = build_unitary(random_params(rng))
        z = np.exp(1j * rng.uniform(0, 2 * math.pi))
        assert abs(char_poly(bc, z) - np.linalg.det(z * np.eye(2) - bc.u)) < 1e-12


def test_char_poly_examples():
    assert char_poly(dirichlet(), 1) == pytest.approx(4)
    assert abs(char_poly(neumann(), 1)) < 1e-15
    z = np.array([0.3 + 0.1j, -2.0, 1j])
    for theta in (0.1, 1.0, 3.0):
        assert np.allclose(char_poly(quasi_periodic(theta), z), z * z - 1, atol=1e-15)


@pytest.mark.parametrize("n", [(1, 1, 0), (0, 0, 0.5), (2, 0, 0)])
def test_non_unit_vector_rejected(n):
    with pytest.raises(ValidationError):
        build_unitary(BoundaryParams(0.0, 0.3, n))


def test_beta_out_of_range_rejected():
    with pytest.raises(ValidationError):
        BoundaryParams(0.0, 2.0)


def test_alpha_reduced_mod_two_pi():
    assert BoundaryParams(-math.pi / 2, 0.0).alpha == pytest.approx(1.5 * math.pi)
    assert BoundaryParams(5 * math.pi, 0.0).alpha == pytest.approx(math.pi)


def test_non_unitary_matrix_rejected():
    with pytest.raises(ValidationError):
        BoundaryCondition(np.array([[1, 1], [1, 1]]))
    with pytest.raises(ValidationError):
        BoundaryCondition(np.eye(3))


def test_equality_and_hash():
    assert dirichlet() == dirichlet()
    assert BoundaryCondition(-np.eye(2)) == BoundaryCondition(-np.eye(2))
    assert dirichlet() != neumann()
    assert len({dirichlet(), dirichlet(), neumann()}) == 2


@pytest.mark.parametrize("L", [0.1, 1.0, 7.5])
def test_dirichlet_admissible(L):
    report = is_admissible(dirichlet(), L)
    assert report and not report.zeros and not report.warning


def test_quasi_periodic_admissible():
    assert is_admissible(quasi_periodic(math.pi / 3), 1.0)


def robin_bound_state(tau, L):
    # zero of h_U(i kappa) for U = e^{i alpha} I with tau = tan(alpha/2)
    f = lambda k: (k + tau) ** 2 * mpexp(2 * k * L) - (k - tau) ** 2  # noqa: E731
    return float(findroot(f, mpf(-tau) + mpf("0.5")))


def test_attractive_robin_flagged_at_oracle_root():
    tau, L = -1.0, 1.0
    report = is_admissible(robin(2 * math.atan(tau)), L)
    assert not report
    assert report.zeros[0] == pytest.approx(robin_bound_state(tau, L), abs=1e-10)
    assert report.zeros[0] == pytest.approx(1.5434046384182096, abs=1e-10)


def test_repulsive_robin_admissible():
    assert is_admissible(robin(2 * math.atan(0.7)), 1.0)


def test_random_admissible_generator(rng):
    for _ in range(30):
        bc = random_admissible(rng)
        for L in (0.2, 1.0, 5.0):
            assert is_admissible(bc, L)
