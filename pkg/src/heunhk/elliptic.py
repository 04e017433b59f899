"""Weierstrass elliptic functions on a complex lattice.

Everything is evaluated from the odd Jacobi theta function
``theta1(v | tau)`` with ``v = pi z / (2 omega1)`` after reducing ``z`` into
the period cell centred at the origin.  Lattice sums are deliberately not
used here; the test-suite ships a slow lattice-sum oracle instead.

Conventions: half-periods ``omega1``, ``omega3`` with ``omega2 = -omega1 -
omega3``, ``e_i = wp(omega_i)`` and ``eta_i = zeta(omega_i)`` without any
re-sorting of the roots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import AlphaOnLattice, DegenerateLattice, NoConvergence, PoleProximity, ValidationError

POLE_GUARD = 1e-8


def _theta_terms(q: complex, im_tau: float) -> int:
    # term n is bounded by exp(-pi Im(tau) (n^2 - 1/4)) once |Im v| <= pi Im(tau)/2
    return int(math.ceil(math.sqrt(45.0 / (math.pi * im_tau)))) + 3


@dataclass(frozen=True)
class Lattice:
    """Period lattice ``2 omega1 Z + 2 omega3 Z`` with its standard constants."""

    omega1: complex
    omega3: complex
    omega2: complex
    tau: complex
    q: complex
    e1: complex
    e2: complex
    e3: complex
    eta1: complex
    eta2: complex
    eta3: complex
    g2: complex
    g3: complex
    nterms: int
    theta1p0: complex
    _inv: tuple

    @property
    def e(self) -> tuple[complex, complex, complex]:
        return (self.e1, self.e2, self.e3)

    @property
    def eta(self) -> tuple[complex, complex, complex]:
        return (self.eta1, self.eta2, self.eta3)

    def omega(self, i: int) -> complex:
        """Half period ``omega_i`` for i = 0..3 (``omega_0 = 0``)."""
        return (0j, self.omega1, self.omega2, self.omega3)[i]

    def eta_of(self, i: int) -> complex:
        return (0j, self.eta1, self.eta2, self.eta3)[i]

    def e_of(self, i: int) -> complex:
        return (np.inf, self.e1, self.e2, self.e3)[i]

    @property
    def legendre_residual(self) -> float:
        return abs(self.eta1 * self.omega3 - self.eta3 * self.omega1 - 0.5j * math.pi)

    def lattice_coords(self, z):
        """Real coordinates (a, b) with ``z = 2 omega1 a + 2 omega3 b``."""
        z = np.asarray(z, dtype=complex)
        m = self._inv
        a = m[0][0] * z.real + m[0][1] * z.imag
        b = m[1][0] * z.real + m[1][1] * z.imag
        return a, b

    def reduce(self, z):
        """Return ``(z0, m, n)`` with ``z = z0 + 2 m omega1 + 2 n omega3`` and z0 in the central cell."""
        z = np.asarray(z, dtype=complex)
        a, b = self.lattice_coords(z)
        m = np.round(a)
        n = np.round(b)
        z0 = z - 2.0 * m * self.omega1 - 2.0 * n * self.omega3
        return z0, m, n

    def is_lattice_point(self, z, tol: float = 1e-9) -> bool:
        z0, _, _ = self.reduce(z)
        return bool(abs(complex(z0)) <= tol * abs(self.omega1))

    def lattice_distance(self, z):
        """Distance from ``z`` to the nearest point of the period lattice."""
        z0, _, _ = self.reduce(z)
        best = np.abs(z0)
        for da in (-1, 0, 1):
            for db in (-1, 0, 1):
                if da == 0 and db == 0:
                    continue
                best = np.minimum(best, np.abs(z0 - 2 * da * self.omega1 - 2 * db * self.omega3))
        return best


def _theta1_tau(tau: complex, nterms: int, v, order: int = 3):
    v = np.asarray(v, dtype=complex)
    n = np.arange(nterms)
    k = 2 * n + 1
    coef = 2.0 * (-1.0) ** n * np.exp(1j * np.pi * tau * (n + 0.5) ** 2)
    kv = v[..., None] * k
    s = np.sin(kv)
    c = np.cos(kv)
    out = [np.sum(coef * s, axis=-1)]
    if order >= 1:
        out.append(np.sum(coef * k * c, axis=-1))
    if order >= 2:
        out.append(-np.sum(coef * k**2 * s, axis=-1))
    if order >= 3:
        out.append(-np.sum(coef * k**3 * c, axis=-1))
    return out


def _check_finite(z, what: str = "point"):
    arr = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"non-finite {what}")
    return arr


def _scalar(x):
    x = np.asarray(x)
    return complex(x) if x.ndim == 0 else x


def make_lattice(omega1: complex, omega3: complex) -> Lattice:
    """Build a lattice from the half periods ``(omega1, omega3)``.

    Raises DegenerateLattice unless ``Im(omega3/omega1) > 0`` and the nome
    ``q = exp(i pi tau)`` is safely inside the unit disc.
    """
    omega1 = complex(omega1)
    omega3 = complex(omega3)
    if not (np.isfinite(omega1) and np.isfinite(omega3)) or omega1 == 0:
        raise DegenerateLattice("half periods must be finite and omega1 nonzero")
    tau = omega3 / omega1
    if tau.imag <= 0:
        raise DegenerateLattice(f"Im(tau) must be positive, got tau={tau}")
    q = complex(np.exp(1j * np.pi * tau))
    if abs(q) >= 1 - 1e-6:
        raise DegenerateLattice(f"|q|={abs(q)} too close to 1")
    nterms = _theta_terms(q, tau.imag)
    _, t1p, _, t1ppp = _theta1_tau(tau, nterms, 0.0)
    t1p = complex(t1p)
    t1ppp = complex(t1ppp)
    eta1 = -(math.pi**2) / (12.0 * omega1) * t1ppp / t1p
    w1, w3 = 2 * omega1, 2 * omega3
    det = w1.real * w3.imag - w3.real * w1.imag
    inv = ((w3.imag / det, -w3.real / det), (-w1.imag / det, w1.real / det))
    proto = Lattice(
        omega1=omega1, omega3=omega3, omega2=-omega1 - omega3, tau=tau, q=q,
        e1=0j, e2=0j, e3=0j, eta1=eta1, eta2=0j, eta3=0j, g2=0j, g3=0j,
        nterms=nterms, theta1p0=t1p, _inv=inv,
    )
    omegas = (omega1, -omega1 - omega3, omega3)
    es = [complex(_wp_raw(proto, w)[0]) for w in omegas]
    etas = [complex(_zeta_raw(proto, w)) for w in omegas]
    e1, e2, e3 = es
    g2 = -4.0 * (e1 * e2 + e2 * e3 + e3 * e1)
    g3 = 4.0 * e1 * e2 * e3
    return Lattice(
        omega1=omega1, omega3=omega3, omega2=-omega1 - omega3, tau=tau, q=q,
        e1=e1, e2=e2, e3=e3, eta1=etas[0], eta2=etas[1], eta3=etas[2],
        g2=g2, g3=g3, nterms=nterms, theta1p0=t1p, _inv=inv,
    )


def lattice_from_tau(tau: complex) -> Lattice:
    """Lattice with ``omega1 = 1/2`` and ``omega3 = tau/2``."""
    return make_lattice(0.5, complex(tau) / 2.0)


# ---------------------------------------------------------------- raw evaluators


def _wp_raw(L: Lattice, z, guard: float = POLE_GUARD, with_prime: bool = False):
    z0, _, _ = L.reduce(z)
    if np.any(np.abs(z0) < guard * abs(L.omega1)):
        raise PoleProximity("point within pole guard of the period lattice")
    scale = math.pi / (2.0 * L.omega1)
    v = scale * z0
    th, th1, th2, th3 = _theta1_tau(L.tau, L.nterms, v)
    r1 = th1 / th
    r2 = th2 / th
    wp = -L.eta1 / L.omega1 - scale**2 * (r2 - r1**2)
    if not with_prime:
        return wp, None
    wpp = -(scale**3) * (th3 / th - 3.0 * r1 * r2 + 2.0 * r1**3)
    return wp, wpp


def _zeta_raw(L: Lattice, z, guard: float = POLE_GUARD):
    z = np.asarray(z, dtype=complex)
    z0, m, n = L.reduce(z)
    if np.any(np.abs(z0) < guard * abs(L.omega1)):
        raise PoleProximity("point within pole guard of the period lattice")
    scale = math.pi / (2.0 * L.omega1)
    th, th1 = _theta1_tau(L.tau, L.nterms, scale * z0, order=1)
    zeta0 = L.eta1 * z0 / L.omega1 + scale * th1 / th
    return zeta0 + 2.0 * m * L.eta1 + 2.0 * n * L.eta3


# ---------------------------------------------------------------- public API


def wp(L: Lattice, z, guard: float = POLE_GUARD):
    """Weierstrass ``wp(z)``."""
    z = _check_finite(z)
    return _scalar(_wp_raw(L, z, guard)[0])


def wp_prime(L: Lattice, z, guard: float = POLE_GUARD):
    z = _check_finite(z)
    return _scalar(_wp_raw(L, z, guard, with_prime=True)[1])


def wp_second(L: Lattice, z, guard: float = POLE_GUARD):
    p = wp(L, z, guard)
    return 6.0 * p * p - L.g2 / 2.0


def wp_and_prime(L: Lattice, z, guard: float = POLE_GUARD):
    z = _check_finite(z)
    a, b = _wp_raw(L, z, guard, with_prime=True)
    return _scalar(a), _scalar(b)


def wp_derivatives(L: Lattice, z, order: int, guard: float = POLE_GUARD):
    """List ``[wp, wp', ..., wp^(order)]`` evaluated at ``z``.

    Uses ``wp'' = 6 wp^2 - g2/2`` differentiated with Leibniz' rule.
    """
    z = _check_finite(z)
    p, pp = _wp_raw(L, z, guard, with_prime=True)
    d = [p, pp]
    for k in range(0, order - 1):
        # d^(k+2) = 6 * sum_j C(k,j) d^(j) d^(k-j)  (+ constant for k = 0)
        acc = sum(comb(k, j) * d[j] * d[k - j] for j in range(k + 1))
        d.append(6.0 * acc - (L.g2 / 2.0 if k == 0 else 0.0))
    return [_scalar(x) for x in d[: order + 1]]


def zeta_w(L: Lattice, z, guard: float = POLE_GUARD):
    """Weierstrass ``zeta(z)``, quasi-periodic with ``zeta(z + 2 omega_i) = zeta(z) + 2 eta_i``."""
    z = _check_finite(z)
    return _scalar(_zeta_raw(L, z, guard))


def log_sigma(L: Lattice, z):
    """A logarithm of ``sigma(z)``; only ``exp`` of it (or differences) is meaningful."""
    z = _check_finite(z)
    z0, m, n = L.reduce(z)
    scale = math.pi / (2.0 * L.omega1)
    th = _theta1_tau(L.tau, L.nterms, scale * z0, order=0)[0]
    with np.errstate(divide="ignore"):
        log0 = np.log(2.0 * L.omega1 / math.pi) + L.eta1 * z0**2 / (2.0 * L.omega1) + np.log(th / L.theta1p0)
    w = m * L.omega1 + n * L.omega3
    eta_w = m * L.eta1 + n * L.eta3
    parity = np.mod(m + n + m * n, 2)
    return log0 + 2.0 * eta_w * (z0 + w) + 1j * math.pi * parity


def sigma(L: Lattice, z):
    """Weierstrass ``sigma(z)`` (entire, odd)."""
    z = _check_finite(z)
    return _scalar(np.exp(log_sigma(L, z)))


def co_sigma(L: Lattice, i: int, z):
    """``sigma_i(z) = exp(-eta_i z) sigma(z + omega_i) / sigma(omega_i)`` for i = 1, 2, 3."""
    if i not in (1, 2, 3):
        raise ValidationError("co-sigma index must be 1, 2 or 3")
    z = _check_finite(z)
    wi = L.omega(i)
    return _scalar(np.exp(-L.eta_of(i) * z + log_sigma(L, z + wi) - log_sigma(L, wi)))


def co_wp(L: Lattice, i: int, z, guard: float = POLE_GUARD):
    """Co-wp function ``wp_i(z) = sigma_i(z) / sigma(z)``; ``wp_i(z)^2 = wp(z) - e_i``."""
    if i not in (1, 2, 3):
        raise ValidationError("co-wp index must be 1, 2 or 3")
    z = _check_finite(z)
    z0, _, _ = L.reduce(z)
    if np.any(np.abs(z0) < guard * abs(L.omega1)):
        raise PoleProximity("co-wp pole at a lattice point")
    wi = L.omega(i)
    return _scalar(np.exp(-L.eta_of(i) * z + log_sigma(L, z + wi) - log_sigma(L, wi) - log_sigma(L, z)))


def phi_func(L: Lattice, i: int, alpha: complex, z, k: int = 0, guard: float = POLE_GUARD):
    """Derivatives ``[Phi_i, Phi_i', ..., Phi_i^(k)]`` of the Hermite-Krichever kernel.

    ``Phi_i(z, alpha) = sigma(z + omega_i - alpha) / sigma(z + omega_i) * exp(zeta(alpha) z)``.
    Derivatives come from the logarithmic derivative
    ``g = zeta(z+omega_i-alpha) - zeta(z+omega_i) + zeta(alpha)`` via
    ``Phi^(n+1) = sum_j C(n,j) g^(j) Phi^(n-j)``.
    """
    if i not in (0, 1, 2, 3):
        raise ValidationError("Phi index must be 0..3")
    if L.lattice_distance(alpha) < guard * abs(L.omega1):
        raise AlphaOnLattice("alpha is congruent to 0 modulo the period lattice")
    z = _check_finite(z)
    wi = L.omega(i)
    u = z + wi - alpha
    w = z + wi
    if np.any(L.lattice_distance(w) < guard * abs(L.omega1)):
        raise PoleProximity("Phi evaluated at its pole")
    za = complex(_zeta_raw(L, alpha))
    phi = np.exp(log_sigma(L, u) - log_sigma(L, w) + za * z)
    out = [phi]
    if k == 0:
        return [_scalar(phi)]
    # g and its derivatives: g^(j) = -wp^(j-1)(u) + wp^(j-1)(w) for j >= 1
    g = [_zeta_raw(L, u, guard=0.0) - _zeta_raw(L, w) + za]
    if k >= 2:
        du = wp_derivatives(L, u, k - 2, guard=0.0)
        dw = wp_derivatives(L, w, k - 2, guard=guard)
        for j in range(k - 1):
            g.append(-np.asarray(du[j]) + np.asarray(dw[j]))
    for n in range(k):
        out.append(sum(comb(n, j) * g[j] * out[n - j] for j in range(n + 1)))
    return [_scalar(x) for x in out]


# ---------------------------------------------------------------- inversion


def _newton_wp(L: Lattice, w: complex, z: complex, maxit: int = 80):
    for _ in range(maxit):
        try:
            p, pp = _wp_raw(L, z, with_prime=True)
        except PoleProximity:
            return None
        p = complex(p)
        pp = complex(pp)
        f = p - w
        if abs(f) <= 1e-15 * max(1.0, abs(w)):
            return z
        if pp == 0:
            return None
        step = f / pp
        # damp huge steps so the iteration stays within a cell
        lim = 0.25 * abs(L.omega1)
        if abs(step) > lim:
            step *= lim / abs(step)
        z = z - step
    return z


def _candidate_key(L: Lattice, z: complex):
    _, b = L.lattice_coords(z)
    return float(b)


def normalize_to_cell(L: Lattice, z: complex) -> complex:
    """Reduce ``z`` into the cell ``{2 omega1 a + 2 omega3 b : a, b in [-1/2, 1/2)}``."""
    a, b = L.lattice_coords(z)
    m = math.floor(float(a) + 0.5)
    n = math.floor(float(b) + 0.5)
    return complex(z - 2 * m * L.omega1 - 2 * n * L.omega3)


def wp_inverse(L: Lattice, w: complex, sign_hint: complex | None = None, tol: float = 1e-9) -> complex:
    """Solve ``wp(z) = w`` for z in the central period cell.

    Without ``sign_hint`` the branch with ``Im(z/omega1) >= 0`` is returned
    (ties broken by the lexicographically larger ``(Re z, Im z)``).  With a
    hint, the branch whose ``wp'(z)`` lies in the same half plane as the hint
    is returned.
    """
    w = complex(w)
    if not np.isfinite(w):
        raise ValidationError("wp_inverse needs a finite value")
    seeds = []
    if w != 0:
        seeds.append(1.0 / np.sqrt(w))
    for i in (1, 2, 3):
        ei = L.e_of(i)
        wi = L.omega(i)
        d2 = 6 * ei * ei - L.g2 / 2
        if d2 != 0:
            h = np.sqrt(2 * (w - ei) / d2)
            seeds.extend([wi + h, wi - h])
        else:
            seeds.append(wi)
    grid = np.linspace(-0.4375, 0.4375, 8)
    for a in grid:
        for b in grid:
            seeds.append(2 * a * L.omega1 + 2 * b * L.omega3)
    seeds = np.asarray(seeds, dtype=complex)
    seeds = seeds[L.lattice_distance(seeds) > 1e-6 * abs(L.omega1)]
    vals = np.asarray(_wp_raw(L, seeds, guard=0.0)[0])
    order = np.argsort(np.abs(vals - w) / (1.0 + np.abs(vals) + abs(w)))
    root = None
    for idx in order[:12]:
        z = _newton_wp(L, w, complex(seeds[idx]))
        if z is None or not np.isfinite(z):
            continue
        try:
            val = complex(_wp_raw(L, z)[0])
        except PoleProximity:
            continue
        if abs(val - w) <= tol * max(1.0, abs(w)):
            root = z
            break
    if root is None:
        raise NoConvergence(f"wp_inverse failed for w={w}")
    cands = [normalize_to_cell(L, root), normalize_to_cell(L, -root)]
    if sign_hint is not None:
        hint = complex(sign_hint)
        derivs = [complex(_wp_raw(L, c, with_prime=True)[1]) for c in cands]
        scores = [(d * hint.conjugate()).real for d in derivs]
        return cands[int(np.argmax(scores))]
    bs = [_candidate_key(L, c) for c in cands]
    eps = 1e-12
    upper = [c for c, b in zip(cands, bs) if b > eps]
    if len(upper) == 1:
        return upper[0]
    return max(cands, key=lambda c: (round(c.real, 12), round(c.imag, 12)))
