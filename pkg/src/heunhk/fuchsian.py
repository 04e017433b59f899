"""Parameter sets of the Fuchsian equation and its elliptic / gauge forms.

A configuration is described by integers ``l = (l0, l1, l2, l3)``, extra
singular points ``b_k = wp(delta_k)`` with exponent gaps ``r_k + 1``, and the
accessory data.  In elliptic form the operator is ``H = -d^2/dx^2 + v(x)``
with eigenvalue ``E``; the gauge form ``H_g`` acts on ``f * Psi_g`` with
``Psi_g = prod (wp(x) - b_k)^(r_k/2)`` and eigenvalue ``E + Cg``.  The
algebraic form in ``z = wp(x)`` carries the accessory parameters ``o_k`` and
``p``.

Apparency of a regular singular point is decided by the Frobenius
recursion on numerically computed Laurent coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from .elliptic import Lattice, wp_and_prime, wp_inverse
from .errors import InsufficientCoefficients, SingularCollision, ValidationError

COLLISION_TOL = 1e-9


def _ints(values, n=None, positive=False, name="l"):
    out = []
    for v in values:
        iv = int(v)
        if iv != v:
            raise ValidationError(f"{name} entries must be integers")
        if positive and iv <= 0:
            raise ValidationError(f"{name} entries must be positive integers")
        if not positive and iv < 0:
            raise ValidationError(f"{name} entries must be non-negative integers")
        out.append(iv)
    if n is not None and len(out) != n:
        raise ValidationError(f"{name} needs exactly {n} entries")
    return tuple(out)


def _cubic(L: Lattice, b):
    return 4 * b**3 - L.g2 * b - L.g3


def _check_points(L: Lattice, b):
    scale = max(1.0, max(abs(e) for e in L.e))
    for k, bk in enumerate(b):
        if not np.isfinite(bk):
            raise ValidationError("b must be finite")
        for e in L.e:
            if abs(bk - e) <= COLLISION_TOL * scale:
                raise SingularCollision(f"b[{k}]={bk} coincides with a half-period value e_i")
        for j in range(k):
            if abs(bk - b[j]) <= COLLISION_TOL * scale:
                raise SingularCollision(f"b[{k}] and b[{j}] coincide")


def _coupling(L: Lattice, k, r, b):
    """The braces term shared by the s -> s_tilde and s -> o conversions (without the l part)."""
    bk, rk = b[k], r[k]
    cross = sum(r[j] / (bk - b[j]) for j in range(len(b)) if j != k)
    return rk * (rk * (12 * bk**2 - L.g2) / 8.0 + 0.5 * _cubic(L, bk) * cross)


def _l_term(L: Lattice, l, bk):
    e1, e2, e3 = L.e
    return 2 * (l[1] * (bk - e2) * (bk - e3) + l[2] * (bk - e1) * (bk - e3) + l[3] * (bk - e1) * (bk - e2))


def _p_shift(L: Lattice, l, r, b):
    """``p - E`` for the algebraic accessory parameter."""
    e1, e2, e3 = L.e
    es = (None, e1, e2, e3)
    shift = e1 * l[1] ** 2 + e2 * l[2] ** 2 + e3 * l[3] ** 2
    shift -= 2 * (l[1] * l[2] * e3 + l[2] * l[3] * e1 + l[3] * l[1] * e2)
    shift -= 0.5 * sum(bk * rk**2 for bk, rk in zip(b, r))
    shift += 2 * sum(l[i] * rk * (es[i] + bk) for bk, rk in zip(b, r) for i in (1, 2, 3))
    shift += 2 * sum(bk * rk for bk, rk in zip(b, r)) * sum(r)
    return shift


def gauge_constant(r, b) -> complex:
    return complex(-0.5 * sum(bk * rk**2 for bk, rk in zip(b, r)) + 2 * sum(bk * rk for bk, rk in zip(b, r)) * sum(r))


@dataclass(frozen=True)
class FuchsianData:
    """A complete, mutually consistent parameter set in all three forms."""

    lattice: Lattice
    l: tuple
    r: tuple
    b: tuple
    delta: tuple
    s: tuple
    s_tilde: tuple
    o: tuple
    E: complex
    p: complex
    Cg: complex
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def M(self) -> int:
        return len(self.r)

    @property
    def R(self) -> int:
        return sum(self.r)

    @property
    def N(self) -> int:
        return sum(self.l) + sum(self.r)

    @property
    def l_tilde(self) -> tuple:
        return (self.l[0] + self.R, self.l[1], self.l[2], self.l[3])

    def with_E(self, E: complex) -> "FuchsianData":
        """Same operator at another eigenvalue (s fixed)."""
        return algebraic_from_elliptic(self.l, self.r, self.b, self.s, E, self.lattice, delta=self.delta)

    # ---- potentials -------------------------------------------------------

    def potential(self, x, derivative: bool = False):
        """``v(x)`` (and ``v'(x)`` when ``derivative``) of the elliptic form."""
        L = self.lattice
        x = np.asarray(x, dtype=complex)
        v = np.zeros_like(x)
        dv = np.zeros_like(x)
        for i in range(4):
            c = self.l[i] * (self.l[i] + 1)
            if c:
                p, pp = wp_and_prime(L, x + L.omega(i))
                v = v + c * p
                dv = dv + c * pp
        if self.M:
            P, PP = wp_and_prime(L, x)
            for rk, bk, dk, sk in zip(self.r, self.b, self.delta, self.s):
                c = rk / 2 * (rk / 2 + 1)
                pm, ppm = wp_and_prime(L, x - dk)
                pl, ppl = wp_and_prime(L, x + dk)
                v = v + c * (pm + pl) + sk / (P - bk)
                dv = dv + c * (ppm + ppl) - sk * PP / (P - bk) ** 2
        return (v, dv) if derivative else v

    def gauge_coefficients(self, x):
        """``(A, V)`` with ``H_g = -d^2/dx^2 + A(x) d/dx + V(x)``."""
        L = self.lattice
        x = np.asarray(x, dtype=complex)
        P, PP = wp_and_prime(L, x)
        A = np.zeros_like(x)
        V = (self.l[0] + self.R) * (self.l[0] + 1 - self.R) * P
        for i in (1, 2, 3):
            c = self.l[i] * (self.l[i] + 1)
            if c:
                V = V + c * np.asarray(wp_and_prime(L, x + L.omega(i))[0])
        for rk, bk, st in zip(self.r, self.b, self.s_tilde):
            A = A + rk * PP / (P - bk)
            V = V + st / (P - bk)
        return A, V

    def psi_g_squared(self, x):
        """``Psi_g(x)^2 = prod (wp(x) - b_k)^r_k`` (single valued)."""
        x = np.asarray(x, dtype=complex)
        if not self.M:
            return np.ones_like(x)
        P = np.asarray(wp_and_prime(self.lattice, x)[0])
        out = np.ones_like(P)
        for rk, bk in zip(self.r, self.b):
            out = out * (P - bk) ** rk
        return out

    def psi_g(self, x):
        """Principal-branch evaluation of ``Psi_g``; callers needing continuity track the sign."""
        x = np.asarray(x, dtype=complex)
        if not self.M:
            return np.ones_like(x)
        P = np.asarray(wp_and_prime(self.lattice, x)[0])
        out = np.ones_like(P)
        for rk, bk in zip(self.r, self.b):
            out = out * np.sqrt(P - bk) ** rk
        return out

    def singular_points(self):
        """Representatives of the singular points of the elliptic/gauge forms in the central cell."""
        L = self.lattice
        pts = [0j]
        for i in (1, 2, 3):
            if self.l[i]:
                pts.append(L.omega(i))
        for d in self.delta:
            pts.extend([d, -d])
        return pts


def _finish(L, l, r, b, s, E, delta=None, meta=None) -> FuchsianData:
    M = len(r)
    if delta is None:
        delta = tuple(wp_inverse(L, bk) for bk in b)
    st = tuple(complex(s[k] - _coupling(L, k, r, b)) for k in range(M))
    o = tuple(complex(-s[k] + _coupling(L, k, r, b) + r[k] * _l_term(L, l, b[k])) for k in range(M))
    p = complex(E + _p_shift(L, l, r, b))
    return FuchsianData(
        lattice=L, l=l, r=r, b=tuple(complex(x) for x in b), delta=tuple(complex(d) for d in delta),
        s=tuple(complex(x) for x in s), s_tilde=st, o=o, E=complex(E), p=p,
        Cg=gauge_constant(r, b), meta=dict(meta or {}),
    )


def _validate(L, l, r, b, other, other_name):
    l = _ints(l, 4, name="l")
    r = _ints(r, positive=True, name="r")
    b = tuple(complex(x) for x in b)
    other = tuple(complex(x) for x in other)
    if len(b) != len(r) or len(other) != len(r):
        raise ValidationError(f"r, b and {other_name} must have the same length")
    _check_points(L, b)
    return l, r, b, other


def algebraic_from_elliptic(l, r, b, s, E, lattice: Lattice, delta=None) -> FuchsianData:
    """Complete the data from the elliptic-form parameters ``(s, E)``; computes ``o``, ``p``, ``s_tilde``, ``Cg``."""
    l, r, b, s = _validate(lattice, l, r, b, s, "s")
    return _finish(lattice, l, r, b, s, complex(E), delta)


def elliptic_from_algebraic(l, r, b, o, p, lattice: Lattice, delta=None) -> FuchsianData:
    """Complete the data from the algebraic accessory parameters ``(o, p)``; computes ``s``, ``E``."""
    l, r, b, o = _validate(lattice, l, r, b, o, "o")
    M = len(r)
    s = tuple(-o[k] + _coupling(lattice, k, r, b) + r[k] * _l_term(lattice, l, b[k]) for k in range(M))
    E = complex(p) - _p_shift(lattice, l, r, b)
    return _finish(lattice, l, r, b, s, E, delta)


def gauge_shift(d: FuchsianData) -> tuple[tuple, complex]:
    """``(s_tilde, Cg)`` of the gauge form."""
    st = tuple(complex(d.s[k] - _coupling(d.lattice, k, d.r, d.b)) for k in range(d.M))
    return st, gauge_constant(d.r, d.b)


# ---------------------------------------------------------------- the M = 1, r = 1 family


def apparency_p_of_mu(l, b1: complex, mu1: complex, lattice: Lattice) -> complex:
    """Accessory parameter ``p`` making ``x = +-delta_1`` apparent (M = 1, r_1 = 1)."""
    l = _ints(l, 4, name="l")
    _check_points(lattice, (b1,))
    L = lattice
    lin = sum((l[i] + 0.5) / (b1 - L.e_of(i)) for i in (1, 2, 3))
    sl = l[1] + l[2] + l[3]
    return complex(_cubic(L, b1) * (-(mu1**2) + lin * mu1) - b1 * (sl - l[0]) * (sl + l[0] + 1))


def mu_from_s_tilde(l, b1, s_tilde, lattice: Lattice) -> complex:
    L = lattice
    return complex(-s_tilde / _cubic(L, b1) + sum(l[i] / (2 * (b1 - L.e_of(i))) for i in (1, 2, 3)))


def s_tilde_from_mu(l, b1, mu1, lattice: Lattice) -> complex:
    L = lattice
    return complex(-(mu1 - sum(l[i] / (2 * (b1 - L.e_of(i))) for i in (1, 2, 3))) * _cubic(L, b1))


def fuchsian_m1r1(l, b1: complex, mu1: complex, lattice: Lattice, p: complex | None = None, delta=None) -> FuchsianData:
    """Data for M = 1, r_1 = 1 from ``(b1, mu1)``; ``p`` defaults to the apparent value."""
    l = _ints(l, 4, name="l")
    if p is None:
        p = apparency_p_of_mu(l, b1, mu1, lattice)
    st = s_tilde_from_mu(l, b1, mu1, lattice)
    s = st + (12 * b1**2 - lattice.g2) / 8.0
    E = complex(p) - _p_shift(lattice, l, (1,), (b1,))
    d = algebraic_from_elliptic(l, (1,), (b1,), (s,), E, lattice, delta=delta)
    d.meta.update(mu1=complex(mu1), p_gauge=complex(p))
    return d


# ---------------------------------------------------------------- the M = 1, r_1 = 2 family


def f0_f1_polys(l, lattice: Lattice) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients (increasing degree) of ``f0(b1)`` and ``f1(b1)`` for M = 1, r_1 = 2."""
    l = _ints(l, 4, name="l")
    L = lattice
    e1, e2, e3 = L.e
    g2, g3 = L.g2, L.g3
    X = Polynomial([0, 1])
    cub = 4 * X**3 - g2 * X - g3
    f1 = -2 * (2 * l[0] ** 2 + 2 * l[0] + 5) * X * cub + (6 * X**2 - g2 / 2) ** 2
    f1 = f1 - 8 * (2 * l[1] ** 2 + 2 * l[1] + 1) * (X - e2) * (X - e3) * (e1 * X + e1**2 + e2 * e3)
    f1 = f1 - 8 * (2 * l[2] ** 2 + 2 * l[2] + 1) * (X - e1) * (X - e3) * (e2 * X + e2**2 + e1 * e3)
    f1 = f1 - 8 * (2 * l[3] ** 2 + 2 * l[3] + 1) * (X - e1) * (X - e2) * (e3 * X + e3**2 + e1 * e2)
    f0 = (2 * l[0] + 1) ** 2 * cub**2
    f0 = f0 - 16 * (2 * l[1] + 1) ** 2 * (e1 - e2) * (e1 - e3) * (X - e2) ** 2 * (X - e3) ** 2
    f0 = f0 - 16 * (2 * l[2] + 1) ** 2 * (e2 - e1) * (e2 - e3) * (X - e1) ** 2 * (X - e3) ** 2
    f0 = f0 - 16 * (2 * l[3] + 1) ** 2 * (e3 - e1) * (e3 - e2) * (X - e1) ** 2 * (X - e2) ** 2
    return np.asarray(f0.coef, dtype=complex), np.asarray(f1.coef, dtype=complex)


def apparency_cubic_r2(l, b1: complex, E: complex, lattice: Lattice) -> np.ndarray:
    """Monic cubic in ``s1`` (highest degree first) whose roots make ``+-delta_1`` apparent for r_1 = 2."""
    f0, f1 = f0_f1_polys(l, lattice)
    L = lattice
    f0v = np.polynomial.polynomial.polyval(b1, f0)
    f1v = np.polynomial.polynomial.polyval(b1, f1)
    return np.array([1.0, 12 * b1**2 - L.g2, 4 * _cubic(L, b1) * E + f1v, f0v], dtype=complex)


# ---------------------------------------------------------------- local expansions / Frobenius


@dataclass(frozen=True)
class LocalExpansion:
    """Laurent data of ``f'' + P f' + Q f = 0`` at ``x = a``.

    ``p[j]`` and ``q[j]`` are the coefficients of ``(x-a)^(j-1)`` in P and of
    ``(x-a)^(j-2)`` in Q, stored rescaled by ``radius**j`` (i.e. in the local
    variable ``(x-a)/radius``), which keeps the recursion scale free.
    """

    a: complex
    p: np.ndarray
    q: np.ndarray
    radius: float = 1.0

    @property
    def exponents(self) -> tuple[complex, complex]:
        p0, q0 = self.p[0], self.q[0]
        disc = np.sqrt((p0 - 1) ** 2 - 4 * q0 + 0j)
        r1 = (-(p0 - 1) - disc) / 2
        r2 = (-(p0 - 1) + disc) / 2
        return (r1, r2) if r1.real <= r2.real else (r2, r1)

    @property
    def gap(self) -> int:
        a1, a2 = self.exponents
        n = a2 - a1
        nr = int(round(n.real))
        if abs(n - nr) > 1e-6:
            raise ValidationError(f"exponent gap {n} is not an integer")
        return nr

    def indicial(self, t):
        return t * t + (self.p[0] - 1) * t + self.q[0]


def local_expansion(P, Qf, a: complex, radius: float, nterms: int = 12, npts: int = 64) -> LocalExpansion:
    """Laurent coefficients of ``(x-a) P(x)`` and ``(x-a)^2 Q(x)`` by a DFT on a circle."""
    k = np.arange(npts)
    w = np.exp(2j * np.pi * k / npts)
    x = a + radius * w
    fp = np.asarray(P(x)) * radius * w
    fq = np.asarray(Qf(x)) * (radius * w) ** 2
    cp = np.fft.fft(fp) / npts
    cq = np.fft.fft(fq) / npts
    return LocalExpansion(a=complex(a), p=cp[:nterms], q=cq[:nterms], radius=float(radius))


def frobenius_is_apparent(le: LocalExpansion, tol: float = 1e-9):
    """Decide whether the local solutions at ``le.a`` are free of logarithms.

    Returns ``(apparent, witness)`` where ``witness`` is the obstruction
    ``sum_{j<n} ((alpha1 + j) p_{n-j} + q_{n-j}) c_j`` (in the rescaled
    variable).  The verdict compares it with the sum of the magnitudes of its
    terms.
    """
    n = le.gap
    if n < 1:
        raise ValidationError("coincident exponents always give a logarithmic solution")
    if len(le.p) <= n or len(le.q) <= n:
        raise InsufficientCoefficients(f"need Laurent coefficients up to index {n}")
    a1 = le.exponents[0]
    c = [1.0 + 0j]
    for j in range(1, n):
        acc = sum(((a1 + jj) * le.p[j - jj] + le.q[j - jj]) * c[jj] for jj in range(j))
        c.append(-acc / le.indicial(a1 + j))
    terms = [((a1 + jj) * le.p[n - jj] + le.q[n - jj]) * c[jj] for jj in range(n)]
    witness = complex(sum(terms))
    scale = sum(abs(t) for t in terms)
    scale = max(scale, max(abs(x) for x in le.p[: n + 1]) + max(abs(x) for x in le.q[: n + 1]))
    return bool(abs(witness) <= tol * scale), witness


def _local_radius(d: FuchsianData, a: complex) -> float:
    L = d.lattice
    pts = []
    for s in d.singular_points() + [L.omega(i) for i in (1, 2, 3)]:
        for m in (-1, 0, 1):
            for n in (-1, 0, 1):
                pts.append(s + 2 * m * L.omega1 + 2 * n * L.omega3)
    dists = [abs(p - a) for p in pts if abs(p - a) > 1e-9 * abs(L.omega1)]
    return min(min(dists) / 3.0, 0.25 * abs(L.omega1))


def gauge_local_expansion(d: FuchsianData, k: int = 0, sign: int = 1, nterms: int = 12) -> LocalExpansion:
    """Local expansion of ``(H_g - E - Cg) f = 0`` at ``x = sign * delta_k``."""
    a = sign * d.delta[k]
    shift = d.E + d.Cg

    def P(x):
        A, _ = d.gauge_coefficients(x)
        return -A

    def Qf(x):
        _, V = d.gauge_coefficients(x)
        return -(V - shift)

    return local_expansion(P, Qf, a, _local_radius(d, a), nterms=nterms)


def algebraic_local_expansion(d: FuchsianData, k: int = 0, nterms: int = 12) -> LocalExpansion:
    """Local expansion of the algebraic (z = wp(x)) equation at ``z = b_k``."""
    L = d.lattice
    es = L.e
    l, r, b, o = d.l, d.r, d.b, d.o
    N = d.N

    def P(z):
        out = sum((0.5 - l[i + 1]) / (z - es[i]) for i in range(3))
        return out - sum(rk / (z - bk) for rk, bk in zip(r, b))

    def Qf(z):
        num = N * (N - 2 * l[0] - 1) * z + d.p + sum(ok / (z - bk) for ok, bk in zip(o, b))
        return num / (4 * (z - es[0]) * (z - es[1]) * (z - es[2]))

    a = b[k]
    others = [abs(a - e) for e in es] + [abs(a - bb) for j, bb in enumerate(b) if j != k]
    radius = min(others) / 3.0
    return local_expansion(P, Qf, a, radius, nterms=nterms)


def is_apparent(d: FuchsianData, tol: float = 1e-9):
    """Apparency of every extra singular point ``+-delta_k`` of the gauge form.

    Returns ``(apparent, witnesses)`` with one witness per (k, sign).
    """
    ok = True
    wit = []
    for k in range(d.M):
        for sign in (1, -1):
            a, w = frobenius_is_apparent(gauge_local_expansion(d, k, sign), tol)
            ok = ok and bool(a)
            wit.append(w)
    return ok, wit


def from_gauge(l, r, b, s_tilde, E_gauge, lattice: Lattice, delta=None) -> FuchsianData:
    """Complete the data from gauge-form parameters: ``s_tilde`` and the gauge eigenvalue ``E + Cg``."""
    l, r, b, s_tilde = _validate(lattice, l, r, b, s_tilde, "s_tilde")
    s = tuple(s_tilde[k] + _coupling(lattice, k, r, b) for k in range(len(r)))
    return _finish(lattice, l, r, b, s, complex(E_gauge) - gauge_constant(r, b), delta)
