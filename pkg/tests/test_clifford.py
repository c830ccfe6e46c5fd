import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from soler2d.clifford import (GAMMA, I2, bilinear, build_gamma_rep, decompose_bilinear_hyper,
                              decompose_bilinear_radial, mat_apply, nonlinearity, proj_hyper,
                              proj_radial, soler_density)
from soler2d.errors import DomainError

rng = np.random.default_rng(7)
finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
spinor = st.tuples(finite, finite, finite, finite).map(
    lambda v: np.array([v[0] + 1j * v[1], v[2] + 1j * v[3]]))


def rand_spinor(*shape):
    return rng.standard_normal((2,) + shape) + 1j * rng.standard_normal((2,) + shape)


def test_representation_is_the_fixed_one():
    g = build_gamma_rep()
    assert np.array_equal(g.g0, np.diag([1, -1]).astype(complex))
    assert np.array_equal(g.g1, np.array([[0, 1j], [1j, 0]]))
    assert np.array_equal(g.g2, np.array([[0, 1], [-1, 0]], dtype=complex))


def test_gamma_examples():
    g = build_gamma_rep()
    assert np.array_equal(g.g0 @ g.g0, I2)
    assert np.array_equal(g.g1 @ g.g2 + g.g2 @ g.g1, np.zeros((2, 2)))
    # g0 g1 = i * sigma_3 sigma_1 = i * [[0, 1], [-1, 0]]
    assert np.array_equal(g.g0 @ g.g1, 1j * np.array([[0, 1], [-1, 0]]))


def test_clifford_and_adjoint_relations():
    assert GAMMA.clifford_residual() <= 1e-15
    assert GAMMA.adjoint_residual() <= 1e-15
    b1, b2 = GAMMA.boosts
    assert np.allclose(b1, b1.conj().T) and np.allclose(b2, b2.conj().T)


def test_density_examples():
    assert soler_density(np.array([0, 0], dtype=complex)) == 0
    assert soler_density(np.array([1, 0], dtype=complex)) == 1
    assert soler_density(np.array([0, 1], dtype=complex)) == -1
    a, b = 0.3 - 1.2j, 2.0 + 0.5j
    assert soler_density(np.array([a, b])) == pytest.approx(abs(a) ** 2 - abs(b) ** 2, abs=1e-14)


def test_nonlinearity_examples():
    assert np.array_equal(nonlinearity(np.zeros(2, complex)), np.zeros(2))
    assert np.array_equal(nonlinearity(np.array([1, 0], complex)), np.array([1, 0]))
    assert np.array_equal(nonlinearity(np.array([0, 2], complex)), np.array([0, -8]))


@settings(max_examples=200, deadline=None)
@given(spinor, finite, finite)
def test_density_is_real_and_quadratic(psi, lr, li):
    lam = lr + 1j * li
    raw = bilinear(psi, psi, GAMMA.g0)
    assert abs(raw.imag) <= 1e-14 * max(1.0, np.vdot(psi, psi).real)
    assert soler_density(lam * psi) == pytest.approx(abs(lam) ** 2 * soler_density(psi),
                                                     rel=1e-12, abs=1e-10)


def test_proj_hyper_examples():
    psi = rand_spinor()
    for sign in (+1, -1):
        assert np.array_equal(proj_hyper(psi, (0.0, 0.0), 3.0, sign), psi)
    b1 = GAMMA.g0 @ GAMMA.g1
    assert np.allclose(proj_hyper(psi, (1.0, 0.0), 2.0, "+"), psi + 0.5 * b1 @ psi, atol=1e-15)
    assert np.allclose(proj_hyper(psi, (1.0, 0.0), 2.0, "-"), psi - 0.5 * b1 @ psi, atol=1e-15)


def test_proj_hyper_rejects_nonpositive_time():
    with pytest.raises(DomainError):
        proj_hyper(rand_spinor(), (0.1, 0.1), 0.0, +1)
    with pytest.raises(ValueError):
        proj_hyper(rand_spinor(), (0.1, 0.1), 1.0, 0)


@settings(max_examples=100, deadline=None)
@given(spinor, finite, finite, st.floats(0.1, 50))
def test_projections_sum_to_twice_psi(psi, x1, x2, t):
    x = (x1, x2)
    total = proj_hyper(psi, x, t, +1) + proj_hyper(psi, x, t, -1)
    assert np.allclose(total, 2 * psi, rtol=0, atol=1e-12 * (1 + np.abs(psi).max()))
    total = proj_radial(psi, x, +1) + proj_radial(psi, x, -1)
    assert np.allclose(total, 2 * psi, rtol=0, atol=1e-12 * (1 + np.abs(psi).max()))


def test_proj_radial_examples():
    psi, phi = rand_spinor(), rand_spinor()
    b1 = GAMMA.g0 @ GAMMA.g1
    assert np.allclose(proj_radial(psi, (2.5, 0.0), -1), psi - b1 @ psi, atol=1e-15)
    x = (0.4, -1.3)
    pp = bilinear(proj_radial(psi, x, +1), proj_radial(phi, x, +1), GAMMA.g0)
    assert abs(pp) <= 1e-13
    for sign in (+1, -1):
        assert np.array_equal(proj_radial(psi, (0.0, 0.0), sign), psi)


def test_plus_plus_identities_vectorized():
    P, Q = rand_spinor(1000), rand_spinor(1000)
    t = rng.uniform(1, 20, 1000)
    r = t * rng.uniform(0, 0.99, 1000)
    phi = rng.uniform(0, 2 * np.pi, 1000)
    x = np.stack([r * np.cos(phi), r * np.sin(phi)])
    lhs = bilinear(proj_hyper(P, x, t, +1), proj_hyper(Q, x, t, +1), GAMMA.g0)
    rhs = (t ** 2 - r ** 2) / t ** 2 * bilinear(P, Q, GAMMA.g0)
    scale = np.linalg.norm(P, axis=0) * np.linalg.norm(Q, axis=0)
    assert np.max(np.abs(lhs - rhs) / scale) <= 1e-12


def test_decompose_hyper_examples():
    zero = np.zeros(2, complex)
    assert np.array_equal(decompose_bilinear_hyper(zero, zero, (0.5, 0.5), 3.0), np.zeros(4))
    P, Q = rand_spinor(), rand_spinor()
    direct = bilinear(P, Q, GAMMA.g0)
    terms = decompose_bilinear_hyper(P, Q, (0.0, 0.0), 2.0)
    assert terms[3] == pytest.approx(0.25 * direct, rel=1e-14)
    assert terms.sum() == pytest.approx(direct, rel=1e-12)
    terms = decompose_bilinear_hyper(P, Q, (1.0, 1.0), 3.0, s=np.sqrt(7.0))
    assert terms.sum() == pytest.approx(direct, rel=1e-12)


def test_decompose_hyper_domain():
    P = rand_spinor()
    with pytest.raises(DomainError):
        decompose_bilinear_hyper(P, P, (3.0, 0.0), 3.0)
    with pytest.raises(DomainError):
        decompose_bilinear_hyper(P, P, (1.0, 0.0), 3.0, s=1.0)


def test_decompose_radial_examples():
    zero = np.zeros(2, complex)
    assert np.array_equal(decompose_bilinear_radial(zero, zero, (1.0, 0.0)), np.zeros(3))
    P, Q = rand_spinor(), rand_spinor()
    assert decompose_bilinear_radial(P, Q, (0.0, 1.0)).sum() == pytest.approx(bilinear(P, Q, GAMMA.g0), rel=1e-12)
    # at x = (0, 1) the minus projector kills the +1 eigenvector of g0 g2 = sigma_1
    K = np.array([1.0, 1.0], dtype=complex)
    assert np.allclose(proj_radial(K, (0.0, 1.0), -1), 0)
    assert np.allclose(decompose_bilinear_radial(K, K, (0.0, 1.0)), 0)
    assert soler_density(K) == 0
    with pytest.raises(DomainError):
        decompose_bilinear_radial(P, Q, (0.0, 0.0))


def test_mat_apply_on_fields():
    psi = rand_spinor(4, 5)
    M = rng.standard_normal((2, 2)) + 0j
    assert np.allclose(mat_apply(M, psi), np.einsum("ij,j...->i...", M, psi))
