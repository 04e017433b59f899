"""Spectral polynomials Q(E) of finite-gap potentials.

Two families are covered: the M = 0 potentials ``sum l_i (l_i + 1) wp(x + omega_i)``
and the M = 1, r_1 = 2, s_1 = 0 potentials with ``b_1`` a root of ``f0``.

Xi is computed at sampled E, normalised by ``Xi(x*) = 1``.  The true Xi is a
polynomial of degree g in E, so a monic ``S(E)`` of degree g turns the sampled
coefficient vectors into polynomials; finding S is a linear problem.  Q then
follows as ``S^2 Qhat`` and is fitted by a polynomial of degree 2g + 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.integrate import solve_ivp

from .elliptic import Lattice
from .errors import DegreeDetectionFailed, NotApparent, RootConditioning
from .fuchsian import FuchsianData, algebraic_from_elliptic, f0_f1_polys, is_apparent
from .hk.xi import SEED, XiFunction, basis_values, build_xi, q_value

G_MAX = 10
FIT_TOL = 1e-8
_PHI = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class SpectralData:
    """``xi_poly[k, m]`` multiplies ``E^m`` in the coefficient of basis function ``labels[k]``.

    ``Q_poly`` is in increasing degree and monic of degree ``2g + 1``.
    """

    g: int
    data: FuchsianData
    labels: tuple
    xi_poly: np.ndarray
    Q_poly: np.ndarray
    band_edges: tuple
    fit_residual: float
    leading: complex

    def xi_coef(self, E: complex) -> np.ndarray:
        return np.array([P.polyval(E, row) for row in self.xi_poly], dtype=complex)

    def xi_at(self, E: complex) -> XiFunction:
        c = self.xi_coef(E)
        return XiFunction(self.data.with_E(E), self.labels, c, c[None, :], np.array([]), float("nan"))

    def q_at(self, E: complex) -> complex:
        return complex(P.polyval(E, self.Q_poly))

    def spot_check(self, E: complex, seed: int = SEED) -> float:
        """Relative difference between ``Q_poly(E)`` and Q of a freshly collocated Xi."""
        xi = build_xi(self.data.with_E(E), seed=seed, check_apparent=False)
        x = _norm_point(self.data)
        target = complex(np.sum(self.xi_coef(E) * basis_values(self.data, x, self.labels, 0)[:, 0, 0]))
        q = q_value(xi.scaled(target / xi(x)))
        ref = self.q_at(E)
        return abs(q - ref) / max(abs(ref), 1e-300)


def _norm_point(d: FuchsianData) -> complex:
    """A fixed point of the cell far from the singular set."""
    L = d.lattice
    sing = [L.omega(i) for i in range(4)] + list(d.delta) + [-x for x in d.delta]
    best, bx = -1.0, None
    for a in (0.19, 0.31, 0.43, 0.57, 0.71):
        for b in (0.23, 0.37, 0.61):
            x = 2 * a * L.omega1 + 2 * b * L.omega3
            c = min(float(L.lattice_distance(x - s)) for s in sing)
            if c > best + 1e-12:
                best, bx = c, x
    return complex(bx)


def _energy_scale(d: FuchsianData) -> float:
    L = d.lattice
    s0 = max(abs(e) for e in L.e)
    weight = 1 + sum(li * (li + 1) for li in d.l) + 6 * d.R
    return float(s0 * weight)


class _Sampler:
    """Normalised Xi coefficients and Qhat at E = R * exp(i theta_k), computed on demand."""

    def __init__(self, d: FuchsianData, seed: int):
        self.d = d
        self.seed = seed
        self.R = _energy_scale(d)
        self.x = _norm_point(d)
        self.eps, self.u, self.q = [], [], []
        self.labels = None

    def take(self, n: int):
        while len(self.eps) < n:
            k = len(self.eps)
            th = 2 * math.pi * ((k * _PHI) % 1.0) + 0.1
            eps = complex(np.exp(1j * th))
            xi = build_xi(self.d.with_E(self.R * eps), seed=self.seed, check_apparent=False)
            xi = xi.scaled(1.0 / xi(self.x))
            self.labels = xi.labels
            self.eps.append(eps)
            self.u.append(xi.coef.copy())
            self.q.append(q_value(xi))
        return np.array(self.eps[:n]), np.array(self.u[:n]), np.array(self.q[:n])


def _vector_fit(eps, u, g):
    """Monic-up-to-scale S (degree g) and polynomial rows with ``S u = Pk``; returns (S, Pk, ratio)."""
    K, n = u.shape
    V = np.vander(eps, g + 1, increasing=True)
    ncol = (g + 1) * (n + 1)
    A = np.zeros((K * n, ncol), dtype=complex)
    for k in range(n):
        rows = slice(k * K, (k + 1) * K)
        A[rows, : g + 1] = V * u[:, k : k + 1]
        A[rows, (k + 1) * (g + 1) : (k + 2) * (g + 1)] = -V
    cs = np.linalg.norm(A, axis=0)
    cs[cs == 0] = 1.0
    _, sv, vh = np.linalg.svd(A / cs, full_matrices=False)
    v = vh[-1].conj() / cs
    S = v[: g + 1]
    Pk = v[g + 1 :].reshape(n, g + 1)
    return S, Pk, float(sv[-1] / sv[0])


def _spectral(d: FuchsianData, seed: int, g_max: int = G_MAX) -> SpectralData:
    smp = _Sampler(d, seed)
    R = smp.R
    for g in range(g_max + 1):
        K = 4 * g + 6
        eps, u, qh = smp.take(K)
        S, Pk, ratio = _vector_fit(eps, u, g)
        if ratio > FIT_TOL:
            continue
        labels = smp.labels
        ic = labels.index(("c", 0, 0))
        lead = Pk[ic, g]
        if abs(lead) < 1e-8 * np.max(np.abs(Pk[:, g])):
            continue
        # Xi with E^g coefficient 1 in the constant basis function
        f = P.polyval(eps, S) / lead * R**g
        qt = f**2 * qh
        c_eps, res = _poly_fit(eps, qt, 2 * g + 1)
        if res > FIT_TOL:
            continue
        scale = R ** np.arange(2 * g + 2, dtype=float)
        Q = c_eps / scale
        xi_poly = (Pk / lead) / R ** np.arange(g + 1, dtype=float)[None, :] * R**g
        leading = complex(Q[-1])
        edges = _edges(Q)
        return SpectralData(g, d.with_E(0.0), tuple(labels), xi_poly, Q, edges, max(ratio, res), leading)
    raise DegreeDetectionFailed(f"no polynomial structure found up to g = {g_max}")


def _poly_fit(eps, y, deg):
    V = np.vander(eps, deg + 1, increasing=True)
    c, *_ = np.linalg.lstsq(V, y, rcond=None)
    res = float(np.linalg.norm(V @ c - y) / max(np.linalg.norm(y), 1e-300))
    return c, res


def _edges(Q) -> tuple:
    roots = np.roots(Q[::-1] / Q[-1]) if len(Q) > 1 else np.array([])
    return tuple(sorted((complex(z) for z in roots), key=lambda z: (round(z.real, 9), round(z.imag, 9))))


def spectral_poly_m0(l, lattice: Lattice, seed: int = SEED, g_max: int = G_MAX) -> SpectralData:
    """Spectral polynomial of the M = 0 potential ``sum l_i (l_i + 1) wp(x + omega_i)``."""
    d = algebraic_from_elliptic(l, (), (), (), 0.0, lattice)
    return _spectral(d, seed, g_max)


def _r2_data(l, b1, lattice, E=0.0) -> FuchsianData:
    return algebraic_from_elliptic(l, (2,), (b1,), (0.0,), E, lattice)


def treibich_b1_roots(l, lattice: Lattice, seed: int = SEED, n_energies: int = 3):
    """Roots of ``f0(b1)``, each checked to make ``+-delta_1`` apparent with s_1 = 0 at random E."""
    f0, _ = f0_f1_polys(l, lattice)
    c = np.trim_zeros(f0, "b")
    roots = np.roots(c[::-1])
    rng = np.random.default_rng(seed)
    scale = max(abs(e) for e in lattice.e)
    out = []
    for b in sorted((complex(z) for z in roots), key=lambda z: (round(z.real, 9), round(z.imag, 9))):
        for E in scale * (rng.normal(size=n_energies) + 1j * rng.normal(size=n_energies)):
            ok, wit = is_apparent(_r2_data(l, b, lattice, E))
            if not ok:
                raise RootConditioning(
                    f"root b1={b} of f0 fails the apparency check at E={E} (witness {max(abs(w) for w in wit):.3e})"
                )
        out.append(b)
    return out


def spectral_poly_m1r2(l, b1_root: complex, lattice: Lattice, seed: int = SEED, g_max: int = G_MAX) -> SpectralData:
    """Spectral polynomial of the M = 1, r_1 = 2, s_1 = 0 potential at a root of ``f0``."""
    d = _r2_data(l, b1_root, lattice)
    ok, _ = is_apparent(d)
    if not ok:
        raise NotApparent("b1 is not a root of f0 (s_1 = 0 is not apparent)")
    return _spectral(d, seed, g_max)


def _obstacles(d: FuchsianData):
    L = d.lattice
    base = [L.omega(i) for i in range(4)] + list(d.delta) + [-x for x in d.delta]
    sh = [2 * m * L.omega1 + 2 * n * L.omega3 for m in range(-2, 3) for n in range(-2, 3)]
    return np.array([b + t for b in base for t in sh])


def _seg_clearance(pts, a, b):
    ab = b - a
    t = np.clip(((pts - a) * np.conj(ab)).real / abs(ab) ** 2, 0.0, 1.0)
    return float(np.min(np.abs(pts - (a + t * ab))))


def monodromy_matrices(d: FuchsianData, rtol: float = 1e-13):
    """Monodromy matrices of ``f'' = (v - E) f`` along ``x0 -> x0 + 2 omega_j`` (j = 1, 3).

    Integrated directly with an explicit Runge-Kutta scheme; columns are the
    continued fundamental solutions with identity initial data at ``x0``.
    """
    L = d.lattice
    pts = _obstacles(d)
    best, x0 = -1.0, None
    for a in np.linspace(-0.45, 0.45, 19):
        for b in np.linspace(-0.45, 0.45, 19):
            x = 2 * (a + 0.007) * L.omega1 + 2 * (b + 0.011) * L.omega3
            c = min(_seg_clearance(pts, x, x + 2 * L.omega1), _seg_clearance(pts, x, x + 2 * L.omega3))
            if c > best:
                best, x0 = c, x
    out = []
    for j in (1, 3):
        w = 2 * L.omega(j)

        def rhs(s, y, w=w):
            v = complex(d.potential(x0 + s * w))
            return [w * y[1], w * (v - d.E) * y[0], w * y[3], w * (v - d.E) * y[2]]

        sol = solve_ivp(rhs, (0.0, 1.0), np.array([1, 0, 0, 1], dtype=complex), method="DOP853", rtol=rtol, atol=rtol)
        y = sol.y[:, -1]
        out.append(np.array([[y[0], y[2]], [y[1], y[3]]]))
    return x0, out


def edge_multiplier(M: np.ndarray) -> complex:
    """Multiplier ``v^H M v`` of the solution closest to being (anti)periodic.

    ``v`` spans the near null space of ``M - eps I`` with ``eps = sign(Re tr M)``.
    Unlike the eigenvalues of ``M``, which move like the square root of any
    error when M is close to a Jordan block, this is well conditioned.
    """
    eps = 1.0 if np.trace(M).real >= 0 else -1.0
    _, _, vh = np.linalg.svd(M - eps * np.eye(2))
    v = vh[-1].conj()
    return complex(np.vdot(v, M @ v) / np.vdot(v, v))


def band_edge_multipliers(sd: SpectralData):
    """``(multiplier over 2 omega_1, multiplier over 2 omega_3)`` at every band edge."""
    out = []
    for E in sd.band_edges:
        _, (M1, M3) = monodromy_matrices(sd.data.with_E(E))
        out.append((edge_multiplier(M1), edge_multiplier(M3)))
    return out


def edge_deviation(mults) -> float:
    """Largest distance of a multiplier from the nearer of +1, -1."""
    return max((min(abs(z - 1), abs(z + 1)) for pair in mults for z in pair), default=0.0)
