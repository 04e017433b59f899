import numpy as np
import pytest

from heunhk.elliptic import make_lattice, wp, wp_prime, wp_second
from heunhk.errors import NotApparent, ValidationError
from heunhk.fuchsian import algebraic_from_elliptic, apparency_cubic_r2, from_gauge, fuchsian_m1r1
from heunhk.hk import (
    bethe_lambda_g,
    bethe_roots,
    build_xi,
    hk_data,
    hk_decompose,
    ode_residual,
    period_factor,
    q_value,
)
from heunhk.hk.monodromy import measured_multiplier
from heunhk.painleve6 import hk_state_forward, q_closed_form

L = make_lattice(0.5, 0.3 + 0.8j)
TAU = L.tau
XS = [0.1 + 0.2j, -0.2 + 0.35j, 0.3 - 0.1j]


def r2_config(l=(1, 0, 2, 1), b1=0.2 + 0.5j, E=0.3):
    s1 = np.roots(apparency_cubic_r2(l, b1, E, L))[0]
    return algebraic_from_elliptic(l, (2,), (b1,), (s1,), E, L)


CONFIGS = {
    "m0_l1000": lambda: algebraic_from_elliptic((1, 0, 0, 0), (), (), (), 0.37 + 0.1j, L),
    "m0_l2101": lambda: algebraic_from_elliptic((2, 1, 0, 1), (), (), (), 0.37 + 0.1j, L),
    "m0_l0010": lambda: algebraic_from_elliptic((0, 0, 1, 0), (), (), (), 0.37 + 0.1j, L),
    "r1_l0000": lambda: fuchsian_m1r1((0, 0, 0, 0), 0.3 + 0.4j, 0.7 - 0.2j, L),
    "r1_l1000": lambda: fuchsian_m1r1((1, 0, 0, 0), 0.3 + 0.4j, 0.7 - 0.2j, L),
    "r1_l1201": lambda: fuchsian_m1r1((1, 2, 0, 1), 0.3 + 0.4j, 0.7 - 0.2j, L),
    "r2_l1021": r2_config,
}


@pytest.fixture(scope="module", params=sorted(CONFIGS))
def solved(request):
    d = CONFIGS[request.param]()
    xi = build_xi(d)
    hk, cont = hk_data(xi)
    return d, xi, hk, cont


def test_xi_for_lame_one():
    E = 0.37 + 0.1j
    d = algebraic_from_elliptic((1, 0, 0, 0), (), (), (), E, L)
    xi = build_xi(d).normalized("b", 0, 1)
    # Xi = wp(x) + E, Q = prod (E + e_i)
    assert abs(xi.coefficient("c", 0, 0) - E) < 1e-10
    Q = q_value(xi)
    assert abs(Q - np.prod([E + e for e in L.e])) < 1e-9


def test_xi_space_operator_residual(solved):
    d, xi, hk, cont = solved
    assert xi.nullspace_dim == 1
    assert xi.residual < 1e-8


def test_lambda_solves_equation(solved):
    d, xi, hk, cont = solved
    for x in XS:
        assert ode_residual(cont, x) < 1e-7


def test_log_derivative_and_wronskian(solved):
    d, xi, hk, cont = solved
    sq = hk.sqrt_mQ
    for x in XS:
        f, f1, _ = cont.jet(x)
        g, g1, _ = cont.jet(-x)
        X = xi(x)
        dX = xi.derivatives(x, 1)[1]
        # Lambda'/Lambda = Xi'/(2 Xi) + sqrt(-Q)/Xi
        assert abs(f1 / f - (dX / (2 * X) + sq / X)) < 1e-7 * (1 + abs(f1 / f))
        # product and Wronskian of Lambda(x), Lambda(-x)
        W = g * f1 + f * g1
        assert abs(W - 2 * sq * f * g / X) < 1e-7 * (abs(W) + abs(sq * f * g / X))


def test_multipliers_match_alpha_kappa(solved):
    d, xi, hk, cont = solved
    for j in (1, 3):
        assert abs(period_factor(hk, L, j) / measured_multiplier(cont, j) - 1) < 1e-6


def test_opposite_root_inverts_multipliers():
    d = CONFIGS["r1_l1201"]()
    xi = build_xi(d)
    hk, _ = hk_data(xi)
    hk2, _ = hk_data(xi, -hk.sqrt_mQ)
    # Lambda(-x) continued with the other root: multipliers are reciprocal
    for a, b in zip(hk.multipliers, hk2.multipliers):
        assert abs(a * b - 1) < 1e-6


def test_hermite_krichever_fit(solved):
    d, xi, hk, cont = solved
    _, _, res = hk_decompose(cont, hk)
    assert res < 1e-6


def test_bethe_form(solved):
    d, xi, hk, cont = solved
    bd = bethe_roots(xi, hk.sqrt_mQ, cont)
    assert bd.sign_residual < 1e-7
    assert L.lattice_distance(bd.alpha_estimate(L) - hk.alpha) < 1e-6
    lg = np.array([cont.lam(x)[1] for x in XS])
    assert np.max(np.abs(lg / bethe_lambda_g(d, bd, np.array(XS)) - 1)) < 1e-6


@pytest.mark.parametrize("b1,mu1", [(0.3 + 0.4j, 0.7 - 0.2j), (-0.5 + 0.1j, 0.2 + 0.3j)])
def test_closed_forms_l0000(b1, mu1):
    d = fuchsian_m1r1((0, 0, 0, 0), b1, mu1, L)
    xi = build_xi(d).normalized("d", 0, 1)
    # Xi = 2 mu1 + 1/(wp - b1)
    assert abs(xi.coefficient("c", 0, 0) - 2 * mu1) < 1e-10
    Q = q_value(xi)
    assert abs(Q - q_closed_form(b1, mu1, L, "l0000")) < 1e-8 * (1 + abs(Q))
    hk, _ = hk_data(xi)
    P, Pp, k = hk_state_forward(b1, mu1, TAU, "l0000", sqrt_mQ=hk.sqrt_mQ)
    assert abs(wp(L, hk.alpha) - P) < 1e-6 * (1 + abs(P))
    assert abs(wp_prime(L, hk.alpha) - Pp) < 1e-6 * (1 + abs(Pp))
    assert abs(hk.kappa - k) < 1e-6 * (1 + abs(k))


@pytest.mark.parametrize("b1,mu1", [(0.3 + 0.4j, 0.7 - 0.2j), (-0.5 + 0.1j, 0.2 + 0.3j)])
def test_closed_forms_l1000(b1, mu1):
    d = fuchsian_m1r1((1, 0, 0, 0), b1, mu1, L)
    xi = build_xi(d).normalized("b", 0, 1)
    Q = q_value(xi)
    assert abs(Q - q_closed_form(b1, mu1, L, "l1000")) < 1e-8 * (1 + abs(Q))
    hk, cont = hk_data(xi)
    # the closed-form wp'(alpha) and kappa pair with the other square root
    P, Pp, k = hk_state_forward(b1, mu1, TAU, "l1000", sqrt_mQ=-hk.sqrt_mQ)
    assert abs(wp(L, hk.alpha) - P) < 1e-6 * (1 + abs(P))
    assert abs(wp_prime(L, hk.alpha) - Pp) < 1e-6 * (1 + abs(Pp))
    assert abs(hk.kappa - k) < 1e-6 * (1 + abs(k))
    c, _, _ = hk_decompose(cont, hk)
    assert abs(c[1] / c[0] - 1 / hk.kappa) < 1e-6 * abs(1 / hk.kappa)


def test_q_zero_gives_sign_multipliers():
    d = fuchsian_m1r1((0, 0, 0, 0), 0.3 + 0.4j, 0.0, L)
    xi = build_xi(d).normalized("d", 0, 1)
    Q = q_value(xi)
    assert abs(Q) < 1e-8
    hk, cont = hk_data(xi, 0j)
    for m in hk.multipliers:
        assert min(abs(m - 1), abs(m + 1)) < 1e-6
    # H_g kills constants here, so Lambda_g is constant and Lambda = 1/Psi_g up to scale
    lg = [cont.lam(x)[1] for x in XS]
    assert max(abs(v - lg[0]) for v in lg) < 1e-10 * abs(lg[0])
    for x in XS:
        lam = cont.lam(x)[0]
        assert abs((lam * lam) * (wp(L, x) - d.b[0]) - lg[0] ** 2) < 1e-10 * abs(lg[0]) ** 2


def test_two_dimensional_space():
    bb = np.sqrt(L.g2 / 12)
    d = from_gauge((1, 0, 0, 0), (1, 1), (bb, -bb), (0, 0), 0.0, L)
    xi = build_xi(d)
    assert xi.nullspace_dim == 2
    assert xi.residual < 1e-8
    xs = np.array([0.1 + 0.2j, 0.33 - 0.1j, 0.05 + 0.4j, -0.2 + 0.3j, 0.41 + 0.05j])
    B = np.array([xi.with_coef(b)(xs) for b in xi.basis]).T
    for f in (1 / wp_second(L, xs), wp_prime(L, xs) ** 2 / wp_second(L, xs)):
        c, *_ = np.linalg.lstsq(B, f, rcond=None)
        assert np.max(np.abs(B @ c - f)) < 1e-8 * np.max(np.abs(f))
    with pytest.raises(ValidationError):
        bethe_roots(xi, 1.0)


def test_non_apparent_rejected():
    d = fuchsian_m1r1((0, 0, 0, 0), 0.3 + 0.4j, 0.7, L, p=1.0)
    with pytest.raises(NotApparent):
        build_xi(d)
