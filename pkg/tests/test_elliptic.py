import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heunhk.elliptic import (
    co_sigma,
    lattice_from_tau,
    make_lattice,
    phi_func,
    sigma,
    wp,
    wp_and_prime,
    wp_derivatives,
    wp_inverse,
    wp_prime,
    zeta_w,
)
from heunhk.errors import AlphaOnLattice, DegenerateLattice


def lattice_sum_wp(w1, w3, z, N):
    """Eisenstein-type sum over a symmetric square of lattice points."""
    m = np.arange(-N, N + 1)
    W = (2 * m[:, None] * w1 + 2 * m[None, :] * w3).ravel()
    W = W[W != 0]
    return 1 / z**2 + np.sum(1 / (z - W) ** 2 - 1 / W**2)


def lattice_invariants(w1, w3, N=400):
    m = np.arange(-N, N + 1)
    W = (2 * m[:, None] * w1 + 2 * m[None, :] * w3).ravel()
    W = W[W != 0]
    return 60 * np.sum(W**-4), 140 * np.sum(W**-6)


taus = st.builds(complex, st.floats(-0.5, 0.5), st.floats(0.6, 2.0))
points = st.builds(complex, st.floats(-0.45, 0.45), st.floats(-0.45, 0.45))


@pytest.mark.parametrize("w1,w3", [(0.5, 0.5j), (0.5, 0.3 + 0.8j), (0.7 + 0.1j, -0.2 + 0.9j)])
def test_wp_against_lattice_sum(w1, w3):
    L = make_lattice(w1, w3)
    for z in (0.13 + 0.07j, 0.31 - 0.22j):
        # truncation error of the symmetric sum is O(1/N^2): Richardson on N = 200, 400
        a = lattice_sum_wp(w1, w3, z, 200)
        b = lattice_sum_wp(w1, w3, z, 400)
        ref = (4 * b - a) / 3
        assert abs(wp(L, z) - ref) < 1e-7 * abs(ref)


def test_invariants_against_lattice_sums():
    w1, w3 = 0.5, 0.3 + 0.8j
    L = make_lattice(w1, w3)
    # tail of the square sum is O(1/N^2); extrapolate from N = 200, 400
    a2, a3 = lattice_invariants(w1, w3, 200)
    b2, b3 = lattice_invariants(w1, w3, 400)
    g2, g3 = (4 * b2 - a2) / 3, (4 * b3 - a3) / 3
    assert abs(L.g2 - g2) < 1e-8 * abs(g2)
    assert abs(L.g3 - g3) < 1e-8 * abs(g3)
    assert abs(sum(L.e)) < 1e-12 * max(abs(e) for e in L.e)


@settings(max_examples=40, deadline=None)
@given(taus)
def test_legendre_relation(tau):
    L = lattice_from_tau(tau)
    assert L.legendre_residual < 1e-12


@settings(max_examples=40, deadline=None)
@given(taus, points)
def test_differential_equation(tau, u):
    L = lattice_from_tau(tau)
    z = u.real * 2 * L.omega1 + u.imag * 2 * L.omega3 + 0.01
    p, pp = wp_and_prime(L, z)
    rhs = 4 * (p - L.e1) * (p - L.e2) * (p - L.e3)
    assert abs(pp**2 - rhs) <= 1e-9 * max(abs(rhs), abs(pp) ** 2, 1.0)
    assert abs(rhs - (4 * p**3 - L.g2 * p - L.g3)) <= 1e-9 * max(abs(rhs), 1.0)


@settings(max_examples=30, deadline=None)
@given(taus, points)
def test_periodicity_and_parity(tau, u):
    L = lattice_from_tau(tau)
    z = u.real * 2 * L.omega1 + u.imag * 2 * L.omega3 + 0.013
    p = wp(L, z)
    for w in (2 * L.omega1, 2 * L.omega3):
        assert abs(wp(L, z + w) - p) < 1e-9 * max(1, abs(p))
    assert abs(wp(L, -z) - p) < 1e-9 * max(1, abs(p))
    assert abs(wp_prime(L, -z) + wp_prime(L, z)) < 1e-9 * max(1, abs(wp_prime(L, z)))


@settings(max_examples=30, deadline=None)
@given(taus, points)
def test_zeta_and_sigma_quasi_periodicity(tau, u):
    L = lattice_from_tau(tau)
    z = u.real * 2 * L.omega1 + u.imag * 2 * L.omega3 + 0.017
    for w, eta in ((L.omega1, L.eta1), (L.omega3, L.eta3)):
        assert abs(zeta_w(L, z + 2 * w) - zeta_w(L, z) - 2 * eta) < 1e-9 * max(1, abs(zeta_w(L, z)))
        ratio = sigma(L, z + 2 * w) / sigma(L, z)
        assert abs(ratio + np.exp(2 * eta * (z + w))) < 1e-8 * abs(ratio)


def test_derivative_chain():
    L = make_lattice(0.5, 0.3 + 0.8j)
    z = 0.21 + 0.13j
    h = 1e-3
    d = wp_derivatives(L, z, 3)
    # zeta' = -wp by a contour derivative of zeta
    w = np.exp(2j * np.pi * np.arange(16) / 16)
    vals = np.array([zeta_w(L, z + h * x) for x in w])
    dz = np.fft.fft(vals)[1] / 16 / h
    assert abs(dz + d[0]) < 1e-10 * abs(d[0])
    assert abs(d[2] - (6 * d[0] ** 2 - L.g2 / 2)) < 1e-9 * abs(d[2])
    assert abs(d[3] - 12 * d[0] * d[1]) < 1e-9 * abs(d[3])


def test_co_sigma_squares_to_wp_difference():
    L = make_lattice(0.5, 0.3 + 0.8j)
    z = 0.21 + 0.13j
    for i in (1, 2, 3):
        # sigma_i(z)^2 / sigma(z)^2 = wp(z) - e_i
        val = (co_sigma(L, i, z) / sigma(L, z)) ** 2
        assert abs(val - (wp(L, z) - L.e_of(i))) < 1e-9 * abs(val)


def test_phi_quasi_periodic():
    L = make_lattice(0.5, 0.3 + 0.8j)
    a = 0.17 - 0.11j
    z = 0.23 + 0.05j
    for w, eta in ((L.omega1, L.eta1), (L.omega3, L.eta3)):
        f0 = phi_func(L, 0, a, z)[0]
        f1 = phi_func(L, 0, a, z + 2 * w)[0]
        expect = np.exp(-2 * eta * a + 2 * w * zeta_w(L, a))
        assert abs(f1 / f0 - expect) < 1e-9 * abs(expect)
    with pytest.raises(AlphaOnLattice):
        phi_func(L, 0, 2 * L.omega1, z)


@settings(max_examples=30, deadline=None)
@given(taus, points)
def test_wp_inverse_roundtrip(tau, u):
    L = lattice_from_tau(tau)
    z = u.real * 2 * L.omega1 + u.imag * 2 * L.omega3 + 0.021
    w = wp(L, z)
    z2 = wp_inverse(L, w)
    assert abs(wp(L, z2) - w) < 1e-9 * max(1, abs(w))
    assert min(L.lattice_distance(z2 - z), L.lattice_distance(z2 + z)) < 1e-7


def test_degenerate_lattice_rejected():
    with pytest.raises(DegenerateLattice):
        make_lattice(0.5, -0.5j)
    with pytest.raises(DegenerateLattice):
        make_lattice(0.5, 1.0)
