import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heunhk.elliptic import lattice_from_tau
from heunhk.errors import DegenerateSelector, ValidationError
from heunhk.painleve6 import (
    _cauchy,
    h_vi,
    hamiltonian_kappa,
    hitchin_b1,
    hitchin_mu1,
    hk_state_roundtrip,
    isomonodromy_check,
    kappa_prod,
    kappas_from_l,
    l01_b1,
    l01_degenerate,
    l01_mu1,
    p6_state,
    riccati_b1,
    riccati_isomonodromy,
    verify_p6,
    verify_p6_elliptic,
)

K0 = kappas_from_l((0, 0, 0, 0))
K1 = kappas_from_l((1, 0, 0, 0))
C1, C3 = 0.31 + 0.07j, 0.54 - 0.11j
sel = st.builds(complex, st.floats(-0.9, 0.9), st.floats(-0.3, 0.3))
taus = st.builds(complex, st.floats(-0.3, 0.3), st.floats(0.7, 1.5))

FAMILIES = {
    "hitchin": (hitchin_b1, K0, (0, 0, 0, 0)),
    "riccati_zero": (lambda a, b, t: riccati_b1(a, b, t, "zero"), K0, (0, 0, 0, 0)),
    "riccati_e1": (lambda a, b, t: riccati_b1(a, b, t, "e1"), K0, (0, 0, 0, 0)),
    "riccati_e2": (lambda a, b, t: riccati_b1(a, b, t, "e2"), K0, (0, 0, 0, 0)),
    "riccati_e3": (lambda a, b, t: riccati_b1(a, b, t, "e3"), K0, (0, 0, 0, 0)),
    "l1000": (l01_b1, K1, (1, 0, 0, 0)),
    "l1000_zero": (lambda a, b, t: l01_degenerate(a, b, t, "zero"), K1, (1, 0, 0, 0)),
    "l1000_e2": (lambda a, b, t: l01_degenerate(a, b, t, "e2"), K1, (1, 0, 0, 0)),
}


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_family_solves_pvi(name):
    f, kap, l = FAMILIES[name]
    rng = np.random.default_rng(5)
    for _ in range(4):
        a = complex(rng.uniform(-1, 1), rng.uniform(-0.3, 0.3))
        b = complex(rng.uniform(-1, 1), rng.uniform(-0.3, 0.3))
        tau0 = complex(rng.uniform(-0.3, 0.3), rng.uniform(0.7, 1.5))

        def g(tau):
            return f(a, b, tau)

        assert verify_p6(g, kap, tau0) < 1e-6
        assert verify_p6_elliptic(g, l, tau0) < 1e-6


def test_perturbed_family_fails_pvi():
    def g(tau):
        return hitchin_b1(C1, C3, tau) + 0.01 * tau

    assert verify_p6(g, K0, 0.9j) > 1e-4


def test_stencil_agrees_with_contour():
    def g(tau):
        return hitchin_b1(C1, C3, tau)

    assert verify_p6(g, K0, 0.1 + 0.9j, method="stencil") < 1e-5


@settings(max_examples=30, deadline=None)
@given(sel, sel, taus)
def test_closed_form_roundtrip(b, mu, tau):
    for fam in ("l0000", "l1000"):
        try:
            _, (b2, mu2) = hk_state_roundtrip(b, mu, tau, fam)
        except ValidationError:
            continue
        assert abs(b2 - b) < 1e-8 * (1 + abs(b))
        assert abs(mu2 - mu) < 1e-8 * (1 + abs(mu))


def test_riccati_as_limits_of_hitchin():
    tau = 0.8j
    D1, D3 = 0.7, 0.4
    for eps, tol in ((1e-3, 1e-4), (1e-4, 1e-6)):
        pairs = [
            ((eps * D1, eps * D3), "zero"),
            ((eps * D1, -1 + eps * D3), "e1"),
            ((-1 + eps * D1, 1 + eps * D3), "e2"),
            ((1 + eps * D1, eps * D3), "e3"),
        ]
        for (a, b), fam in pairs:
            assert abs(hitchin_b1(a, b, tau) - riccati_b1(D1, D3, tau, fam)) < tol


def test_degenerate_selector():
    with pytest.raises(DegenerateSelector):
        hitchin_b1(0, 0, 0.8j)
    with pytest.raises(DegenerateSelector):
        l01_b1(2, 0, 0.8j)
    with pytest.raises(DegenerateSelector):
        riccati_b1(0, 0, 0.8j, "zero")


@pytest.mark.parametrize("l", [(0, 0, 0, 0), (1, 0, 0, 0), (2, 1, 0, 3), (0, 1, 1, 1)])
def test_kappa_maps(l):
    k = kappas_from_l(l)
    assert k == (l[1] + 0.5, l[2] + 0.5, l[3] + 0.5, l[0] + 0.5)
    assert hamiltonian_kappa(k) == pytest.approx(kappa_prod(l) / 4)


@pytest.mark.parametrize("fam", ["l0000", "l1000"])
def test_hamilton_equations(fam):
    bf, mf, l = (hitchin_b1, hitchin_mu1, (0, 0, 0, 0)) if fam == "l0000" else (l01_b1, l01_mu1, (1, 0, 0, 0))
    k = kappas_from_l(l)
    tau0, rho, n = 0.1 + 0.9j, 0.02, 24
    pts = [p6_state(l, bf(C1, C3, tau), mf(C1, C3, tau), tau) for tau in tau0 + rho * np.exp(2j * np.pi * np.arange(n) / n)]
    lam, l1, _ = _cauchy([s.lam for s in pts], rho)
    mu, m1, _ = _cauchy([s.mu for s in pts], rho)
    t, t1, _ = _cauchy([s.t for s in pts], rho)
    h = 1e-6
    dmu = (h_vi(lam, mu + h, t, k) - h_vi(lam, mu - h, t, k)) / (2 * h)
    dlam = (h_vi(lam + h, mu, t, k) - h_vi(lam - h, mu, t, k)) / (2 * h)
    assert abs(l1 / t1 - dmu) < 1e-7 * (1 + abs(dmu))
    assert abs(m1 / t1 + dlam) < 1e-7 * (1 + abs(dlam))


def test_p6_state_coordinates():
    L = lattice_from_tau(0.8j)
    b = 0.4 + 0.3j
    s = p6_state((0, 0, 0, 0), b, 0.3, 0.8j)
    assert abs(s.lam * (L.e2 - L.e1) + L.e1 - b) < 1e-12
    assert abs(s.mu - (L.e2 - L.e1) * 0.3) < 1e-12
    assert abs(s.t - (L.e3 - L.e1) / (L.e2 - L.e1)) < 1e-12


@pytest.mark.parametrize("fam", ["l0000", "l1000"])
def test_isomonodromy(fam):
    r = isomonodromy_check(C1, C3, [0.8j, 0.85j, 0.9j, 0.95j, 1.0j], fam)
    assert r["spread"] < 1e-5
    assert r["distance_to_selector"] < 1e-5


def test_isomonodromy_negative_control():
    r = isomonodromy_check(C1, C3, [0.8j, 0.9j, 1.0j], "l0000", b1_shift=1e-2)
    assert r["spread"] > 1e-4


def test_riccati_multipliers_trivial():
    for row in riccati_isomonodromy(0.7, 0.4, [0.8j, 0.9j]):
        for m in row["multipliers"]:
            assert min(abs(m - 1), abs(m + 1)) < 1e-6
