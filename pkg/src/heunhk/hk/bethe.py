"""Bethe-type factorisation of Lambda: zeros t_j, exponent c and normalisation C0."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..elliptic import co_sigma, log_sigma, wp_inverse, wp_prime, zeta_w
from ..errors import RootConditioning, ValidationError
from .integral import Continuation
from .xi import XiFunction

CLUSTER_TOL = 1e-6


@dataclass(frozen=True)
class BetheData:
    l_total: int
    t: tuple
    z: tuple
    c: complex
    C0: complex
    sign_residual: float
    l: tuple

    def alpha_estimate(self, lattice) -> complex:
        """``sum t_j - sum l_i omega_i`` (to be compared with alpha modulo the lattice)."""
        return complex(sum(self.t)) - sum(self.l[i] * lattice.omega(i) for i in (1, 2, 3))


def _cluster(roots, tol):
    roots = sorted(roots, key=lambda z: (round(z.real, 6), round(z.imag, 6)))
    groups = []
    for z in roots:
        for g in groups:
            if abs(z - np.mean(g)) <= tol * max(1.0, abs(z)):
                g.append(z)
                break
        else:
            groups.append([z])
    return [(complex(np.mean(g)), len(g)) for g in groups]


def _taylor_at(poly, z0, k):
    """k-th Taylor coefficient of ``poly`` at ``z0``."""
    return complex(poly.deriv(k)(z0) / math.factorial(k)) if k else complex(poly(z0))


def bethe_roots(xi: XiFunction, sqrt_mQ: complex, cont: Continuation | None = None) -> BetheData:
    """Zeros ``t_j`` of Lambda_g with the sign fixed by ``dXi/dz (z_j) = 2 sqrt(-Q) / wp'(t_j)``."""
    d = xi.data
    L = d.lattice
    if xi.nullspace_dim != 1:
        raise ValidationError("Bethe form needs a one-dimensional space of Xi")
    if sqrt_mQ == 0:
        raise ValidationError("Bethe form needs Q != 0")
    P = xi.z_polynomial()
    Den = xi.z_denominator()
    lt = d.N
    coef = P.coef[: lt + 1]
    big = np.max(np.abs(coef))
    if abs(coef[-1]) <= 1e-12 * big:
        raise RootConditioning("numerator degree dropped; a zero sits at a lattice point")
    roots = np.roots(coef[::-1])
    groups = _cluster(list(roots), CLUSTER_TOL)
    ts, zs = [], []
    worst = 0.0
    for z0, mult in groups:
        # structural multiple roots sit at b_k with multiplicity r_k + 1
        k_den = 0
        for rk, bk in zip(d.r, d.b):
            if abs(z0 - bk) <= CLUSTER_TOL * max(1.0, abs(bk)):
                k_den = rk
                z0 = bk
        if mult > 1 and mult != k_den + 1:
            raise RootConditioning(f"unexpected root multiplicity {mult} at z={z0}")
        if mult == 1 and k_den:
            raise RootConditioning("simple zero at an extra singular point")
        dxi = _taylor_at(P, z0, mult) / _taylor_at(Den, z0, k_den)
        t = wp_inverse(L, z0)
        target = 2 * sqrt_mQ / dxi
        wpp = complex(wp_prime(L, t))
        if abs(wpp + target) < abs(wpp - target):
            t = -t
            wpp = -wpp
        worst = max(worst, abs(wpp - target) / max(abs(target), 1e-300))
        ts.extend([t] * mult)
        zs.extend([z0] * mult)
    # c from the expansion at x = 0
    c = sum(complex(zeta_w(L, t)) for t in ts)
    if d.l[0] == 0:
        c += complex(sqrt_mQ / _xi_at_zero(xi))
    if cont is None:
        cont = Continuation(xi, sqrt_mQ)
    x1 = cont.x0
    C0 = complex(cont.start.lam_g / _bethe_shape(d, ts, c, x1))
    return BetheData(lt, tuple(ts), tuple(zs), complex(c), C0, worst, d.l)


def _xi_at_zero(xi: XiFunction) -> complex:
    """``Xi(0)`` when l0 = 0: terms in 1/(wp - b) vanish, wp(x + omega_i) -> e_i."""
    d = xi.data
    tot = 0j
    for c, (kind, i, m) in zip(xi.coef, xi.labels):
        if kind == "c":
            tot += c
        elif kind == "b" and i > 0:
            tot += c * d.lattice.e_of(i) ** m
    return tot


def _bethe_shape(d, ts, c, x):
    """``prod sigma(x - t_j) / (sigma^lt0 prod sigma_i^l_i) exp(c x)`` (Lambda_g up to C0)."""
    L = d.lattice
    lt = d.l_tilde
    x = np.asarray(x, dtype=complex)
    lg = sum(log_sigma(L, x - t) for t in ts) - lt[0] * log_sigma(L, x) + c * x
    val = np.exp(lg)
    for i in (1, 2, 3):
        if lt[i]:
            val = val / np.asarray(co_sigma(L, i, x)) ** lt[i]
    return val


def bethe_lambda_g(d, bd: BetheData, x):
    """Lambda_g evaluated from its Bethe factorisation."""
    return bd.C0 * _bethe_shape(d, bd.t, bd.c, x)
