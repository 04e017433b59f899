"""Period multipliers of Lambda_g and the Hermite-Krichever parameters (alpha, kappa)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..elliptic import Lattice, phi_func, wp_derivatives, zeta_w
from ..errors import FitResidualTooLarge
from .integral import Continuation
from .xi import XiFunction, q_value

DEGENERATE_TOL = 1e-7


@dataclass(frozen=True)
class HKData:
    Q: complex
    sqrt_mQ: complex
    m1: complex
    m3: complex
    alpha: complex
    kappa: complex
    branch: str
    multipliers: tuple
    x0: complex

    def as_dict(self) -> dict:
        return {
            "Q": self.Q, "sqrt_minus_Q": self.sqrt_mQ, "m1": self.m1, "m3": self.m3,
            "alpha": self.alpha, "kappa": self.kappa, "branch": self.branch,
        }


def _reduce_m(m: complex) -> complex:
    re = m.real - 2 * math.floor((m.real + 1) / 2)
    if abs(re - 1) < 1e-12:
        re = -1.0
    return complex(re, m.imag)


def period_path(cont: Continuation, j: int):
    """Segment ``eps -> eps + 2 omega_j`` with the largest clearance among a fixed set of offsets."""
    L = cont.L
    w = 2 * L.omega(j)
    other = 2 * (L.omega3 if j == 1 else L.omega1)
    best, bp = -1.0, None
    for s in np.linspace(-0.45, 0.45, 37):
        for t in (0.0, 0.1, -0.1):
            eps = s * other + t * w + 0.003 * (w + other)
            c = cont.clearance_segment(eps, eps + w)
            if c > best + 1e-12:
                best, bp = c, eps
    return [bp, bp + w]


def measured_multiplier(cont: Continuation, j: int) -> complex:
    """``Lambda_g(eps + 2 omega_j) / Lambda_g(eps)`` along the straight period path."""
    a, b = period_path(cont, j)
    if abs(a - cont.x0) > 0:
        st0 = cont.walk(cont.auto_path(cont.x0, a))
    else:
        st0 = cont.start
    st1 = cont.walk([a, b], start=st0)
    return complex(st1.sqrt_g / st0.sqrt_g * np.exp(st1.integral - st0.integral))


def monodromy_multipliers(xi: XiFunction, sqrt_mQ: complex | None = None, Q: complex | None = None):
    """``(m1, m3, cont)`` with ``Lambda_g(x + 2 omega_j) = exp(pi i m_j) Lambda_g(x)``, m_j modulo 2."""
    if sqrt_mQ is None:
        if Q is None:
            Q = q_value(xi)
        sqrt_mQ = complex(np.sqrt(-complex(Q)))
    cont = Continuation(xi, sqrt_mQ)
    ms = []
    for j in (1, 3):
        mult = measured_multiplier(cont, j)
        ms.append(_reduce_m(complex(np.log(mult) / (1j * math.pi))))
    return ms[0], ms[1], cont


def hk_parameters(m1: complex, m3: complex, lattice: Lattice, tol: float = DEGENERATE_TOL):
    """``(alpha, kappa, branch, m1, m3)``; in the degenerate branch kappa is kappa-bar.

    In the degenerate branch the exponents are shifted by even integers so that
    alpha vanishes exactly, which fixes kappa-bar unambiguously.
    """
    L = lattice
    alpha = -m1 * L.omega3 + m3 * L.omega1
    if L.lattice_distance(alpha) > tol * abs(L.omega1):
        kappa = complex(zeta_w(L, m1 * L.omega3 - m3 * L.omega1)) - m1 * L.eta3 + m3 * L.eta1
        return complex(alpha), complex(kappa), "generic", m1, m3
    _, a, b = L.reduce(alpha)
    a, b = float(a), float(b)
    m3 = m3 - 2 * a
    m1 = m1 + 2 * b
    kbar = -m1 * L.eta3 + m3 * L.eta1
    return 0j, complex(kbar), "degenerate", m1, m3


def hk_data(xi: XiFunction, sqrt_mQ: complex | None = None):
    """Measure the multipliers and package them with alpha, kappa."""
    Q = q_value(xi)
    if sqrt_mQ is None:
        sqrt_mQ = complex(np.sqrt(-Q))
    m1, m3, cont = monodromy_multipliers(xi, sqrt_mQ)
    alpha, kappa, branch, m1, m3 = hk_parameters(m1, m3, xi.data.lattice)
    mults = (complex(np.exp(1j * math.pi * m1)), complex(np.exp(1j * math.pi * m3)))
    return HKData(Q, complex(sqrt_mQ), m1, m3, alpha, kappa, branch, mults, cont.x0), cont


def period_factor(hk: HKData, lattice: Lattice, j: int) -> complex:
    """Multiplier predicted from (alpha, kappa) for the period ``2 omega_j``."""
    L = lattice
    w = L.omega(j)
    if hk.branch == "degenerate":
        return complex(np.exp(2 * hk.kappa * w))
    eta = L.eta_of(j)
    return complex(np.exp(-2 * eta * hk.alpha + 2 * w * zeta_w(L, hk.alpha) + 2 * hk.kappa * w))


def _sample_grid(cont: Continuation, n: int = 24, clearance: float = 0.08):
    L = cont.L
    pts = []
    for a in np.linspace(-0.42, 0.42, 7):
        for b in np.linspace(-0.42, 0.42, 7):
            x = 2 * (a + 0.011) * L.omega1 + 2 * (b + 0.007) * L.omega3
            if cont.clearance_point(x) >= clearance * abs(L.omega1):
                pts.append(x)
    return np.array(pts[:: max(1, len(pts) // n)])


def hk_basis(hk: HKData, d, x):
    """Columns of the Hermite-Krichever basis (generic or degenerate) at points ``x``."""
    L = d.lattice
    lt = d.l_tilde
    cols, names = [], []
    x = np.asarray(x, dtype=complex)
    if hk.branch == "generic":
        ek = np.exp(hk.kappa * x)
        for i in range(4):
            if lt[i] == 0:
                continue
            ders = phi_func(L, i, hk.alpha, x, lt[i] - 1)
            for j in range(lt[i]):
                cols.append(ek * np.asarray(ders[j]))
                names.append(("phi", i, j))
    else:
        ek = np.exp(hk.kappa * x)
        cols.append(ek)
        names.append(("c", 0, 0))
        for i in range(4):
            if lt[i] < 2:
                continue
            ders = wp_derivatives(L, x + L.omega(i), lt[i] - 2)
            for j in range(lt[i] - 1):
                cols.append(ek * np.asarray(ders[j]))
                names.append(("wp", i, j))
        p, pp = wp_derivatives(L, x, 1)
        for i in (1, 2, 3):
            cols.append(ek * np.asarray(pp) / (np.asarray(p) - L.e_of(i)))
            names.append(("ci", i, 0))
    return np.array(cols).T, names


def hk_decompose(cont: Continuation, hk: HKData, tol: float = 1e-6):
    """Fit ``Lambda_g`` onto the Hermite-Krichever basis; returns ``(coefficients, names, residual)``."""
    d = cont.d
    x = _sample_grid(cont)
    y = np.array([cont.lam(xx)[1] for xx in x])
    A, names = hk_basis(hk, d, x)
    cs = np.linalg.norm(A, axis=0)
    cs[cs == 0] = 1.0
    c, *_ = np.linalg.lstsq(A / cs, y, rcond=None)
    c = c / cs
    res = float(np.linalg.norm(A @ c - y) / np.linalg.norm(y))
    if res > tol:
        raise FitResidualTooLarge(f"Hermite-Krichever fit residual {res:.3e}")
    return c, names, res
