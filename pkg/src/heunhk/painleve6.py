"""Closed-form Painleve VI solutions from Hermite-Krichever data, and their numerical verification.

Conventions: ``omega1 = 1/2``, ``omega3 = tau/2``,
``t = (e3 - e1)/(e2 - e1)``, ``lambda = (b1 - e1)/(e2 - e1)`` and
``kappa_0, kappa_1, kappa_t, kappa_inf = l1 + 1/2, l2 + 1/2, l3 + 1/2, l0 + 1/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .elliptic import Lattice, lattice_from_tau, wp, wp_and_prime, wp_inverse, zeta_w
from .errors import BranchJump, DegenerateSelector, DenominatorZero, StencilThroughSingularity, ValidationError
from .fuchsian import apparency_p_of_mu, fuchsian_m1r1
from .hk.monodromy import hk_data
from .hk.xi import build_xi

FAMILIES = ("l0000", "l1000")
L_OF_FAMILY = {"l0000": (0, 0, 0, 0), "l1000": (1, 0, 0, 0)}
DEN_TOL = 1e-12


def kappas_from_l(l) -> tuple[float, float, float, float]:
    """``(kappa_0, kappa_1, kappa_t, kappa_inf)``."""
    return (l[1] + 0.5, l[2] + 0.5, l[3] + 0.5, l[0] + 0.5)


def kappa_prod(l) -> int:
    s = l[1] + l[2] + l[3]
    return (s + l[0] + 1) * (s - l[0])


def _check_den(x, what):
    if not np.isfinite(x) or abs(x) < DEN_TOL:
        raise DenominatorZero(f"{what} vanishes")
    return x


def _selector(C1, C3, L: Lattice):
    w = C1 * L.omega3 - C3 * L.omega1
    eta = C1 * L.eta3 - C3 * L.eta1
    return w, eta


@dataclass(frozen=True)
class P6State:
    l: tuple
    tau: complex
    b1: complex
    mu1: complex
    lam: complex
    t: complex
    mu: complex
    HVI: complex
    p: complex

    @property
    def kappas(self):
        return kappas_from_l(self.l)

    @property
    def kappa_prod(self):
        return kappa_prod(self.l)


def p6_state(l, b1: complex, mu1: complex, tau: complex) -> P6State:
    L = lattice_from_tau(tau)
    e1, e2, e3 = L.e
    t = (e3 - e1) / (e2 - e1)
    lam = (b1 - e1) / (e2 - e1)
    mu = (e2 - e1) * mu1
    p = apparency_p_of_mu(l, b1, mu1, L)
    H = ((p + kappa_prod(l) * e3) / (e2 - e1) + lam * (1 - lam) * mu) / (t * (1 - t))
    return P6State(tuple(l), complex(tau), complex(b1), complex(mu1), complex(lam), complex(t), complex(mu), complex(H), complex(p))


def hamiltonian_kappa(kappas) -> float:
    """``((k0 + k1 + kt - 1)^2 - kinf^2) / 4``, the constant in the PVI Hamiltonian."""
    k0, k1, kt, ki = kappas
    return ((k0 + k1 + kt - 1) ** 2 - ki**2) / 4


def h_vi(lam: complex, mu: complex, t: complex, kappas) -> complex:
    """The PVI Hamiltonian in its standard polynomial form."""
    k0, k1, kt, _ = kappas
    kap = hamiltonian_kappa(kappas)
    return (
        lam * (lam - 1) * (lam - t) * mu**2
        - (k0 * (lam - 1) * (lam - t) + k1 * lam * (lam - t) + (kt - 1) * lam * (lam - 1)) * mu
        + kap * (lam - t)
    ) / (t * (t - 1))


# ---------------------------------------------------------------- the kappa = (1/2,1/2,1/2,1/2) families


def hitchin_b1(C1: complex, C3: complex, tau: complex) -> complex:
    L = lattice_from_tau(tau)
    w, eta = _selector(C1, C3, L)
    if L.lattice_distance(w) < 1e-10:
        raise DegenerateSelector("C1 omega3 - C3 omega1 is a lattice point; use the Riccati families")
    P, Pp = wp_and_prime(L, w)
    den = zeta_w(L, w) - eta
    if abs(den) < DEN_TOL:
        raise DegenerateSelector("zeta(omega) - eta vanishes")
    return complex(P + Pp / (2 * den))


def hitchin_mu1(C1: complex, C3: complex, tau: complex) -> complex:
    L = lattice_from_tau(tau)
    w, eta = _selector(C1, C3, L)
    return complex((zeta_w(L, w) - eta) / wp_and_prime(L, w)[1])


def _riccati_we(D1, D3, L):
    W = D1 * L.omega3 - D3 * L.omega1
    H = D1 * L.eta3 - D3 * L.eta1
    return W, H


def riccati_b1(D1: complex, D3: complex, tau: complex, family: str = "zero") -> complex:
    """Riccati-type solutions (Q = 0) for kappa = (1/2, 1/2, 1/2, 1/2)."""
    L = lattice_from_tau(tau)
    W, H = _riccati_we(D1, D3, L)
    if family == "zero":
        if abs(W) < DEN_TOL:
            raise DegenerateSelector("D1 omega3 - D3 omega1 vanishes")
        return complex(-H / W)
    ei = _family_e(L, family)
    den = ei * W + H
    if abs(den) < DEN_TOL:
        raise DegenerateSelector("denominator vanishes")
    return complex(((L.g2 / 4 - 2 * ei * ei) * W + ei * H) / den)


def riccati_mu1(b1: complex, tau: complex, family: str = "zero") -> complex:
    if family == "zero":
        return 0j
    L = lattice_from_tau(tau)
    return complex(1 / (2 * (b1 - _family_e(L, family))))


def _family_e(L, family):
    try:
        return {"e1": L.e1, "e2": L.e2, "e3": L.e3}[family]
    except KeyError:
        raise ValidationError(f"unknown family {family!r}") from None


# ---------------------------------------------------------------- the kappa_inf = 3/2 families


def _l01_inverse(P, Pp, k, g2):
    """``(b1, mu1)`` from ``(wp(alpha), wp'(alpha), kappa)`` for l = (1,0,0,0)."""
    d1 = _check_den(2 * (k**3 - 3 * P * k + Pp), "b1 denominator")
    b1 = (2 * P * k**3 - 3 * Pp * k**2 + (6 * P * P - g2) * k - P * Pp) / d1
    d2 = _check_den(-2 * Pp * k**3 + (12 * P * P - g2) * k**2 - 6 * P * Pp * k + Pp**2, "mu1 denominator")
    mu1 = 2 * (k**3 - 3 * P * k + Pp) * k / d2
    return complex(b1), complex(mu1)


def l01_b1(C1: complex, C3: complex, tau: complex) -> complex:
    L = lattice_from_tau(tau)
    w, eta = _selector(C1, C3, L)
    if L.lattice_distance(w) < 1e-10:
        raise DegenerateSelector("C1 omega3 - C3 omega1 is a lattice point; use l01_degenerate")
    P, Pp = wp_and_prime(L, w)
    k = zeta_w(L, w) - eta
    try:
        return _l01_inverse(P, -Pp, k, L.g2)[0]
    except DenominatorZero as exc:
        raise DegenerateSelector(str(exc)) from None


def l01_mu1(C1: complex, C3: complex, tau: complex) -> complex:
    L = lattice_from_tau(tau)
    w, eta = _selector(C1, C3, L)
    P, Pp = wp_and_prime(L, w)
    return _l01_inverse(P, -Pp, zeta_w(L, w) - eta, L.g2)[1]


def l01_degenerate(D1: complex, D3: complex, tau: complex, family: str = "zero") -> complex:
    """Q = 0 solutions for l = (1,0,0,0); ``family`` is "zero" (cubic locus) or e1/e2/e3."""
    L = lattice_from_tau(tau)
    w, eta = _riccati_we(D1, D3, L)
    g2, g3 = L.g2, L.g3
    if family == "zero":
        den = w * (g2 * w * w - 12 * eta * eta)
        if abs(den) < DEN_TOL:
            raise DegenerateSelector("denominator vanishes")
        return complex((4 * eta**3 + g2 * w * w * eta - 2 * g3 * w**3) / den)
    ei = _family_e(L, family)
    den = (6 * ei * ei - g2) * w - 6 * ei * eta
    if abs(den) < DEN_TOL:
        raise DegenerateSelector("denominator vanishes")
    return complex((-g2 * ei * w / 2 + (6 * ei * ei - g2) * eta) / den)


# ---------------------------------------------------------------- (b1, mu1) <-> (wp(alpha), wp'(alpha), kappa)


def q_closed_form(b1: complex, mu1: complex, L: Lattice, family: str) -> complex:
    """The invariant Q for Xi normalised as in the closed forms (d-coefficient 1, resp. wp-coefficient 1)."""
    e1, e2, e3 = L.e
    b, mu = b1, mu1
    if family == "l0000":
        return complex(2 * mu * (2 * mu * (e1 - b) + 1) * (2 * (e2 - b) * mu + 1) * (2 * mu * (e3 - b) + 1))
    C = 4 * b**3 - b * L.g2 - L.g3
    den = 2 * C * mu**3 - (12 * b * b - L.g2) * mu**2 + 4
    # the factor attached to e_i carries e_j e_k
    out = -den
    for ei, ej, ek in ((e1, e2, e3), (e2, e1, e3), (e3, e1, e2)):
        out = out * (2 * (b * b + ei * b + ej * ek) * mu - 2 * b - ei)
    return complex(out)


def hk_state_forward(b1: complex, mu1: complex, tau: complex, family: str, sqrt_mQ: complex | None = None):
    """``(wp(alpha), wp'(alpha), kappa)`` from the closed forms; ``sqrt_mQ`` defaults to the principal root."""
    L = lattice_from_tau(tau)
    if sqrt_mQ is None:
        sqrt_mQ = complex(np.sqrt(-q_closed_form(b1, mu1, L, family)))
    b, mu = b1, mu1
    if family == "l0000":
        _check_den(mu, "mu1")
        return complex(b - 1 / (2 * mu)), complex(-sqrt_mQ / (2 * mu * mu)), complex(sqrt_mQ / (2 * mu))
    if family != "l1000":
        raise ValidationError(f"unknown family {family!r}")
    g2, g3 = L.g2, L.g3
    C = 4 * b**3 - b * g2 - g3
    den = _check_den(2 * C * mu**3 - (12 * b * b - g2) * mu**2 + 4, "closed-form denominator")
    P = (2 * C * b * mu**3 + (-24 * b**3 + 4 * g2 * b + 3 * g3) * mu**2 + (24 * b * b - 2 * g2) * mu - 8 * b) / den
    Pp = -4 * (C * mu**3 - (12 * b * b - g2) * mu**2 + 12 * b * mu - 4) / den**2 * sqrt_mQ
    k = 2 * mu / den * sqrt_mQ
    return complex(P), complex(Pp), complex(k)


def hk_state_inverse(P: complex, Pp: complex, k: complex, tau: complex, family: str):
    """``(b1, mu1)`` from ``(wp(alpha), wp'(alpha), kappa)``."""
    L = lattice_from_tau(tau)
    if family == "l0000":
        _check_den(Pp, "wp'(alpha)")
        _check_den(k, "kappa")
        return complex(P - Pp / (2 * k)), complex(-k / Pp)
    if family != "l1000":
        raise ValidationError(f"unknown family {family!r}")
    return _l01_inverse(P, Pp, k, L.g2)


def hk_state_roundtrip(b1: complex, mu1: complex, tau: complex, family: str):
    """Forward then inverse map; returns ``(forward_triple, (b1', mu1'))``."""
    fw = hk_state_forward(b1, mu1, tau, family)
    return fw, hk_state_inverse(*fw, tau, family)


# ---------------------------------------------------------------- verification


def _stencil(f, x0, h):
    vals = [f(x0 + k * h) for k in (-2, -1, 0, 1, 2)]
    return vals


def _d1(y, h):
    return (y[0] - 8 * y[1] + 8 * y[3] - y[4]) / (12 * h)


def _d2(y, h):
    return (-y[0] + 16 * y[1] - 30 * y[2] + 16 * y[3] - y[4]) / (12 * h * h)


def p6_rhs(lam, t, dlam, kappas):
    k0, k1, kt, ki = kappas
    return (
        0.5 * (1 / lam + 1 / (lam - 1) + 1 / (lam - t)) * dlam**2
        - (1 / t + 1 / (t - 1) + 1 / (lam - t)) * dlam
        + lam * (lam - 1) * (lam - t) / (t**2 * (t - 1) ** 2)
        * (ki**2 / 2 - k0**2 / 2 * t / lam**2 + k1**2 / 2 * (t - 1) / (lam - 1) ** 2 + (1 - kt**2) / 2 * t * (t - 1) / (lam - t) ** 2)
    )


def _lam_t(b1_of_tau, tau):
    L = lattice_from_tau(tau)
    e1, e2, e3 = L.e
    b = complex(b1_of_tau(tau))
    t = (e3 - e1) / (e2 - e1)
    lam = (b - e1) / (e2 - e1)
    scale = max(1.0, abs(lam))
    if not np.isfinite(lam) or min(abs(lam), abs(lam - 1), abs(lam - t)) < 1e-6 * scale:
        raise StencilThroughSingularity("lambda meets 0, 1, t or infinity inside the stencil")
    return lam, t


def _cauchy(y, rho):
    """``(f, f', f'')`` at the centre from samples on a circle of radius ``rho``."""
    c = np.fft.fft(np.asarray(y)) / len(y)
    return c[0], c[1] / rho, 2 * c[2] / rho**2


def verify_p6(b1_of_tau: Callable[[complex], complex], kappas, tau0: complex, h: float | None = None,
              method: str = "contour", npts: int = 24) -> float:
    """Residual of the rational-form PVI for ``lambda(t)`` built from ``b1(tau)``.

    ``method="stencil"`` uses five-point differences with step ``h`` (default
    1e-4 |tau0|); ``method="contour"`` uses ``npts`` samples on a circle of
    radius ``h`` (default 0.02 |tau0|), which avoids cancellation near t = 1.
    """
    tau0 = complex(tau0)
    if method == "stencil":
        if h is None:
            h = 1e-4 * abs(tau0)
        pts = [_lam_t(b1_of_tau, tau0 + k * h) for k in (-2, -1, 0, 1, 2)]
        lams, ts = [p[0] for p in pts], [p[1] for p in pts]
        lam, l1, l2 = lams[2], _d1(lams, h), _d2(lams, h)
        t, t1, t2 = ts[2], _d1(ts, h), _d2(ts, h)
    elif method == "contour":
        if h is None:
            h = 0.02 * abs(tau0)
        h = min(h, 0.5 * tau0.imag)
        w = np.exp(2j * np.pi * np.arange(npts) / npts)
        pts = [_lam_t(b1_of_tau, tau0 + h * wk) for wk in w]
        lam, l1, l2 = _cauchy([p[0] for p in pts], h)
        t, t1, t2 = _cauchy([p[1] for p in pts], h)
    else:
        raise ValueError(f"unknown method {method!r}")
    lt = l1 / t1
    ltt = (l2 - lt * t2) / t1**2
    rhs = p6_rhs(lam, t, lt, kappas)
    return float(abs(ltt - rhs) / max(1.0, abs(ltt)))


def verify_p6_elliptic(b1_of_tau: Callable[[complex], complex], l, tau0: complex, h: float | None = None) -> float:
    """Residual of ``delta'' = -(1/8 pi^2) sum (l_i + 1/2)^2 wp'(delta + omega_i)`` with delta tracked by continuity."""
    tau0 = complex(tau0)
    if h is None:
        h = 1e-3 * abs(tau0)
    L0 = lattice_from_tau(tau0)
    d0 = wp_inverse(L0, b1_of_tau(tau0))
    deltas = {}
    for k in (0, 1, 2, -1, -2):
        tau = tau0 + k * h
        L = lattice_from_tau(tau)
        ref = deltas.get(k - 1 if k > 0 else k + 1, d0) if k else d0
        z = wp_inverse(L, b1_of_tau(tau))
        cands = [s * z + m * 2 * L.omega1 + n * 2 * L.omega3 for s in (1, -1) for m in (-1, 0, 1) for n in (-1, 0, 1)]
        best = min(cands, key=lambda c: abs(c - ref))
        if abs(best - ref) > 0.1 * abs(L.omega1):
            raise BranchJump("delta continuation jumped between stencil points")
        deltas[k] = best
    ys = [deltas[k] for k in (-2, -1, 0, 1, 2)]
    dd = _d2(ys, h)
    rhs = -sum((l[i] + 0.5) ** 2 * wp_and_prime(L0, ys[2] + L0.omega(i))[1] for i in range(4)) / (8 * math.pi**2)
    return float(abs(dd - rhs) / max(1.0, abs(dd)))


# ---------------------------------------------------------------- isomonodromy


def family_b1_mu1(C1, C3, tau, family: str):
    L = lattice_from_tau(tau)
    alpha = C3 * L.omega1 - C1 * L.omega3
    kap = zeta_w(L, C1 * L.omega3 - C3 * L.omega1) + C3 * L.eta1 - C1 * L.eta3
    P, Pp = wp_and_prime(L, alpha)
    return hk_state_inverse(P, Pp, kap, tau, family)


def _mod2_dist(a, b):
    d = a - b
    re = d.real - 2 * round(d.real / 2)
    return abs(complex(re, d.imag))


def isomonodromy_check(C1, C3, tau_grid, family: str = "l0000", b1_shift: complex = 0j, seed: int | None = None):
    """Measure (m1, m3) along a tau grid for the family fixed by (C1, C3).

    Returns a dict with the per-tau exponents (sign of sqrt(-Q) chosen to
    match the first grid point), the spread, and the distance of the measured
    exponents from (C1, C3) modulo 2.
    """
    l = L_OF_FAMILY[family]
    rows = []
    ref = None
    for tau in tau_grid:
        L = lattice_from_tau(tau)
        b1, mu1 = family_b1_mu1(C1, C3, tau, family)
        d = fuchsian_m1r1(l, b1 + b1_shift, mu1, L)
        xi = build_xi(d, **({"seed": seed} if seed is not None else {}), check_apparent=False)
        hk, _ = hk_data(xi)
        m = (hk.m1, hk.m3)
        if ref is None:
            # orient so that m matches (C1, C3) rather than (-C1, -C3) when possible
            if _mod2_dist(-m[0], C1) + _mod2_dist(-m[1], C3) < _mod2_dist(m[0], C1) + _mod2_dist(m[1], C3):
                m = (-m[0], -m[1])
            ref = m
        elif _mod2_dist(-m[0], ref[0]) + _mod2_dist(-m[1], ref[1]) < _mod2_dist(m[0], ref[0]) + _mod2_dist(m[1], ref[1]):
            m = (-m[0], -m[1])
        rows.append({"tau": complex(tau), "b1": b1, "mu1": mu1, "m1": m[0], "m3": m[1], "Q": hk.Q})
    spread = max(max(_mod2_dist(r["m1"], ref[0]), _mod2_dist(r["m3"], ref[1])) for r in rows)
    target = max(max(_mod2_dist(r["m1"], C1), _mod2_dist(r["m3"], C3)) for r in rows)
    return {"rows": rows, "spread": spread, "distance_to_selector": target}


def riccati_isomonodromy(D1, D3, tau_grid, family: str = "zero", seed: int | None = None):
    """Multipliers along a Riccati family (Q = 0); they should stay at +-1."""
    rows = []
    for tau in tau_grid:
        L = lattice_from_tau(tau)
        b1 = riccati_b1(D1, D3, tau, family)
        mu1 = riccati_mu1(b1, tau, family)
        d = fuchsian_m1r1((0, 0, 0, 0), b1, mu1, L)
        xi = build_xi(d, **({"seed": seed} if seed is not None else {}), check_apparent=False)
        hk, _ = hk_data(xi, sqrt_mQ=0j)
        rows.append({"tau": complex(tau), "b1": b1, "multipliers": hk.multipliers, "m1": hk.m1, "m3": hk.m3})
    return rows
