"""Continuation of ``Lambda = sqrt(Xi) exp(int sqrt(-Q)/Xi)`` along polygonal paths.

Two square roots are tracked by continuity: ``sqrt(Xi)`` (giving Lambda,
which branches at the extra singular points) and ``sqrt(G)`` with
``G = Xi * Psi_g^2`` single valued, giving the meromorphic
``Lambda_g = sqrt(G) exp(I)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..elliptic import wp_inverse
from ..errors import BranchTrackingLost, NoConvergence, PathThroughSingularity
from .xi import XiFunction

GUARD = 1e-3
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
MAX_DEPTH = 40


@dataclass
class State:
    x: complex
    integral: complex
    sqrt_xi: complex
    sqrt_g: complex

    @property
    def lam(self) -> complex:
        return self.sqrt_xi * np.exp(self.integral)

    @property
    def lam_g(self) -> complex:
        return self.sqrt_g * np.exp(self.integral)


def _pick(root: complex, prev: complex) -> complex:
    return root if abs(root - prev) <= abs(root + prev) else -root


def xi_zeros(xi: XiFunction) -> list[complex]:
    """Representatives (both signs) of the zeros of Xi in the period cell."""
    P = xi.z_polynomial()
    c = P.coef
    if not np.any(c):
        return []
    big = np.max(np.abs(c))
    k = len(c)
    while k > 1 and abs(c[k - 1]) <= 1e-13 * big:
        k -= 1
    if k <= 1:
        return []
    roots = np.roots(c[:k][::-1])
    L = xi.data.lattice
    out = []
    for z in roots:
        if not np.isfinite(z) or abs(z) > 1e12:
            continue
        try:
            t = wp_inverse(L, z, tol=1e-6)
        except Exception:
            continue
        out.extend([t, -t])
    return out


class Continuation:
    """Analytic continuation of the integral-representation solution for a fixed ``sqrt(-Q)``."""

    def __init__(self, xi: XiFunction, sqrt_mQ: complex, x0: complex | None = None, guard: float = GUARD):
        self.xi = xi
        self.d = xi.data
        self.L = self.d.lattice
        self.sqrt_mQ = complex(sqrt_mQ)
        self.guard = guard * abs(self.L.omega1)
        obst = [self.L.omega(i) for i in range(4)]
        obst += list(self.d.delta) + [-x for x in self.d.delta]
        obst += xi_zeros(xi)
        self.obstacles = np.array(obst, dtype=complex)
        if x0 is None:
            x0 = self.best_point()
        self.x0 = complex(x0)
        if self.clearance_point(self.x0) < self.guard:
            raise PathThroughSingularity("basepoint too close to a singular point or a zero of Xi")
        X0 = complex(self._xi(self.x0))
        G0 = X0 * complex(self._psi2(self.x0))
        self.start = State(self.x0, 0j, complex(np.sqrt(X0)), complex(np.sqrt(G0)))

    # ---- geometry -------------------------------------------------------

    def _translates(self, a: complex, b: complex):
        L = self.L
        ca, cb = L.lattice_coords(np.array([a, b]))
        ms = range(int(math.floor(min(ca))) - 1, int(math.ceil(max(ca))) + 2)
        ns = range(int(math.floor(min(cb))) - 1, int(math.ceil(max(cb))) + 2)
        sh = np.array([2 * m * L.omega1 + 2 * n * L.omega3 for m in ms for n in ns])
        return (self.obstacles[:, None] + sh[None, :]).ravel()

    def clearance_segment(self, a: complex, b: complex) -> float:
        pts = self._translates(a, b)
        ab = b - a
        if ab == 0:
            return float(np.min(np.abs(pts - a)))
        t = np.clip(((pts - a) * np.conj(ab)).real / abs(ab) ** 2, 0.0, 1.0)
        return float(np.min(np.abs(pts - (a + t * ab))))

    def clearance_point(self, x: complex) -> float:
        return self.clearance_segment(x, x)

    def best_point(self) -> complex:
        L = self.L
        best, bx = -1.0, None
        for a in np.linspace(-0.4, 0.4, 9):
            for b in np.linspace(-0.4, 0.4, 9):
                x = 2 * (a + 0.013) * L.omega1 + 2 * (b + 0.017) * L.omega3
                c = self.clearance_point(x)
                if c > best + 1e-12:
                    best, bx = c, x
        return complex(bx)

    def auto_path(self, a: complex, b: complex) -> list[complex]:
        """Straight segment if clear, otherwise a one-corner detour maximising clearance."""
        if self.clearance_segment(a, b) >= 5 * self.guard:
            return [a, b]
        mid = 0.5 * (a + b)
        ab = b - a
        n = 1j * ab / abs(ab) if ab != 0 else 1.0
        scale = max(abs(ab), 0.2 * abs(self.L.omega1))
        best, bp = -1.0, None
        for s in (0.15, -0.15, 0.3, -0.3, 0.5, -0.5, 0.8, -0.8):
            for tt in (0.0, 0.25, -0.25):
                p = mid + s * scale * n + tt * ab
                c = min(self.clearance_segment(a, p), self.clearance_segment(p, b))
                if c > best:
                    best, bp = c, p
        if best < self.guard:
            raise PathThroughSingularity("no admissible detour found")
        return [a, bp, b]

    # ---- evaluation -----------------------------------------------------

    def _xi(self, x):
        return self.xi(x)

    def _psi2(self, x):
        return self.d.psi_g_squared(x)

    def _integrand(self, x):
        return self.sqrt_mQ / np.asarray(self._xi(x))

    def _segment(self, st: State, b: complex, tol: float) -> State:
        a = st.x
        if self.clearance_segment(a, b) < self.guard:
            raise PathThroughSingularity(f"segment {a} -> {b} passes a singular point or a zero of Xi")
        nseg = max(1, int(math.ceil(abs(b - a) / (0.1 * abs(self.L.omega1)))))
        pts = a + (b - a) * np.arange(nseg + 1) / nseg
        for k in range(nseg):
            st = self._piece(st, pts[k + 1], tol)
        return st

    def _gl(self, a, b):
        if self.sqrt_mQ == 0:
            return 0j
        x = 0.5 * (a + b) + 0.5 * (b - a) * _GL_X
        return complex(0.5 * (b - a) * np.sum(_GL_W * self._integrand(x)))

    def _piece(self, st: State, b: complex, tol: float) -> State:
        stack = [(st.x, b, 0, None)]
        cur = st
        while stack:
            a, bb, depth, whole = stack.pop()
            if depth > MAX_DEPTH:
                raise NoConvergence("adaptive quadrature did not converge")
            m = 0.5 * (a + bb)
            if whole is None:
                whole = self._gl(a, bb)
            left = self._gl(a, m)
            right = self._gl(m, bb)
            X = complex(self._xi(bb))
            G = X * complex(self._psi2(bb))
            sx = _pick(complex(np.sqrt(X)), cur.sqrt_xi)
            sg = _pick(complex(np.sqrt(G)), cur.sqrt_g)
            jump = max(abs(sx - cur.sqrt_xi) / abs(cur.sqrt_xi), abs(sg - cur.sqrt_g) / abs(cur.sqrt_g))
            err = abs(left + right - whole)
            if err <= tol * max(1.0, abs(left + right)) and jump < 0.25:
                cur = State(bb, cur.integral + left + right, sx, sg)
                continue
            if depth == MAX_DEPTH:
                raise BranchTrackingLost("square-root tracking lost along the path")
            stack.append((m, bb, depth + 1, right))
            stack.append((a, m, depth + 1, left))
        return cur

    def walk(self, path, start: State | None = None, tol: float = 1e-13) -> State:
        """Continue along the polygon ``path`` (first vertex = start point)."""
        st = self.start if start is None else start
        path = [complex(p) for p in path]
        if abs(path[0] - st.x) > 1e-14 * (1 + abs(st.x)):
            raise ValueError("path must start at the current state point")
        for p in path[1:]:
            st = self._segment(st, p, tol)
        return st

    def state_at(self, x: complex, path=None) -> State:
        if path is None:
            path = self.auto_path(self.x0, complex(x))
        return self.walk(path)

    def lam(self, x: complex, path=None) -> tuple[complex, complex]:
        st = self.state_at(x, path)
        return st.lam, st.lam_g

    def jet(self, x: complex, path=None, n: int = 32, which: str = "lam"):
        """``(f, f', f'')`` for ``f = Lambda`` (or ``Lambda_g``) from a DFT on a small circle."""
        st = self.state_at(x, path)
        rho = min(0.4 * self.clearance_point(st.x), 0.05 * abs(self.L.omega1))
        w = np.exp(2j * np.pi * np.arange(n) / n)
        vals = []
        for wk in w:
            s2 = self._segment(st, st.x + rho * wk, 1e-14)
            vals.append(s2.lam if which == "lam" else s2.lam_g)
        c = np.fft.fft(np.array(vals)) / n
        return complex(c[0]), complex(c[1] / rho), complex(2 * c[2] / rho**2)


def lambda_eval(xi: XiFunction, sqrt_mQ: complex, x: complex, path=None, x0=None):
    """``(Lambda(x), Lambda_g(x))`` continued from the basepoint along ``path``."""
    return Continuation(xi, sqrt_mQ, x0).lam(x, path)


def ode_residual(cont: Continuation, x: complex, path=None) -> float:
    """``|Lambda'' - (v - E) Lambda| / (1 + |Lambda''|)`` with Lambda'' from a contour DFT."""
    f, _, f2 = cont.jet(x, path)
    v = complex(cont.d.potential(cont.state_at(x, path).x))
    return abs(f2 - (v - cont.d.E) * f) / (1 + abs(f2))
