"""The even doubly periodic solution Xi of the symmetric-square equation.

``Xi''' - 4 (v - E) Xi' - 2 v' Xi = 0`` is solved on the ansatz

    Xi = c0 + sum_i sum_m b[i][m] wp(x + omega_i)^m + sum_k sum_m d[k][m] (wp(x) - b_k)^(-m)

by oversampled collocation and an SVD null space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from ..elliptic import Lattice, wp_and_prime
from ..errors import EmptyNullspace, NonConstantQ, NotApparent
from ..fuchsian import FuchsianData, is_apparent

NULL_TOL = 1e-10
SEED = 20240611


def _basis_labels(d: FuchsianData):
    labels = [("c", 0, 0)]
    for i in range(4):
        for m in range(d.l[i], 0, -1):
            labels.append(("b", i, m))
    for k in range(d.M):
        for m in range(d.r[k], 0, -1):
            labels.append(("d", k, m))
    return labels


def _chain(G, u1, u2, u3):
    """Derivatives of ``G(u(x))`` up to order 3 from ``G_j = d^jG/du^j`` and ``u^(j)``."""
    G0, G1, G2, G3 = G
    return G0, G1 * u1, G2 * u1**2 + G1 * u2, G3 * u1**3 + 3 * G2 * u1 * u2 + G1 * u3


def basis_values(d: FuchsianData, x, labels=None, order: int = 3):
    """Array ``out[k, j, n]``: j-th derivative of basis function j at ``x[n]``."""
    L = d.lattice
    if labels is None:
        labels = _basis_labels(d)
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    g2 = L.g2
    cache = {}

    def wp_data(i):
        if i not in cache:
            u, u1 = wp_and_prime(L, x + L.omega(i))
            u = np.asarray(u)
            u1 = np.asarray(u1)
            u2 = 6 * u * u - g2 / 2
            u3 = 12 * u * u1
            cache[i] = (u, u1, u2, u3)
        return cache[i]

    out = np.zeros((len(labels), 4, len(x)), dtype=complex)
    for k, (kind, i, m) in enumerate(labels):
        if kind == "c":
            out[k, 0] = 1.0
            continue
        if kind == "b":
            u, u1, u2, u3 = wp_data(i)
            G = [u**m, m * u ** (m - 1), m * (m - 1) * u ** max(m - 2, 0), m * (m - 1) * (m - 2) * u ** max(m - 3, 0)]
        else:
            u, u1, u2, u3 = wp_data(0)
            w = u - d.b[i]
            G = [w ** (-m), -m * w ** (-m - 1), m * (m + 1) * w ** (-m - 2), -m * (m + 1) * (m + 2) * w ** (-m - 3)]
        out[k] = np.array(_chain(G, u1, u2, u3))
    return out[:, : order + 1]


def _sample_points(d: FuchsianData, n: int, seed: int, guard: float = 0.05):
    """``n`` pseudo random points in the period cell, away from the singular set."""
    L = d.lattice
    rng = np.random.default_rng(seed)
    sing = [L.omega(i) for i in range(4)] + list(d.delta) + [-x for x in d.delta]
    pts = []
    tries = 0
    while len(pts) < n:
        tries += 1
        a, b = rng.uniform(-0.5, 0.5, size=2)
        x = 2 * a * L.omega1 + 2 * b * L.omega3
        if min(float(L.lattice_distance(x - s)) for s in sing) >= guard * abs(L.omega1):
            pts.append(x)
        if tries > 100 * n + 1000:
            raise EmptyNullspace("could not place collocation points")
    return np.array(pts, dtype=complex)


def _operator_rows(d: FuchsianData, x, labels):
    B = basis_values(d, x, labels)
    v, dv = d.potential(x, derivative=True)
    v = np.asarray(v)
    dv = np.asarray(dv)
    # column k, row n: Xi''' - 4 (v - E) Xi' - 2 v' Xi
    A = B[:, 3, :] - 4 * (v - d.E) * B[:, 1, :] - 2 * dv * B[:, 0, :]
    scale = np.abs(B[:, 3, :]) + 4 * np.abs((v - d.E) * B[:, 1, :]) + 2 * np.abs(dv * B[:, 0, :])
    return A.T, scale.T


@dataclass(frozen=True)
class XiFunction:
    """Coefficients of Xi in the basis labelled by ``labels`` (see module docstring)."""

    data: FuchsianData
    labels: tuple
    coef: np.ndarray
    basis: np.ndarray
    singular_values: np.ndarray
    residual: float

    @property
    def nullspace_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def c0(self) -> complex:
        return complex(self.coef[0])

    def _lookup(self, kind):
        d = self.data
        n = 4 if kind == "b" else d.M
        out = [[] for _ in range(n)]
        for c, (k, i, m) in zip(self.coef, self.labels):
            if k == kind:
                out[i].append(complex(c))
        return out

    @property
    def bcoef(self):
        """``bcoef[i][j]`` multiplies ``wp(x + omega_i)^(l_i - j)``."""
        return self._lookup("b")

    @property
    def dcoef(self):
        """``dcoef[k][j]`` multiplies ``(wp(x) - b_k)^-(r_k - j)``."""
        return self._lookup("d")

    def coefficient(self, kind: str, i: int, m: int) -> complex:
        return complex(self.coef[self.labels.index((kind, i, m))])

    def scaled(self, factor: complex) -> "XiFunction":
        return XiFunction(self.data, self.labels, self.coef * factor, self.basis, self.singular_values, self.residual)

    def normalized(self, kind: str, i: int, m: int) -> "XiFunction":
        """Rescale so the coefficient of the given basis function is 1."""
        return self.scaled(1.0 / self.coefficient(kind, i, m))

    def with_coef(self, coef) -> "XiFunction":
        return XiFunction(self.data, self.labels, np.asarray(coef, dtype=complex), self.basis, self.singular_values, self.residual)

    def derivatives(self, x, order: int = 3):
        """``[Xi, Xi', ..., Xi^(order)]`` at ``x``."""
        scalar = np.ndim(x) == 0
        B = basis_values(self.data, x, self.labels, order)
        out = np.einsum("k,kjn->jn", self.coef, B)
        return [complex(r[0]) for r in out] if scalar else list(out)

    def __call__(self, x):
        return self.derivatives(x, 0)[0]

    def operator_residual(self, x) -> float:
        """Relative residual of the third-order equation at ``x``."""
        A, scale = _operator_rows(self.data, np.atleast_1d(x), self.labels)
        num = np.abs(A @ self.coef)
        den = np.abs(scale) @ np.abs(self.coef)
        # every term vanishes identically (v = 0, constant Xi): an exact solution
        ratio = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
        return float(np.max(ratio))

    def z_polynomial(self) -> Polynomial:
        """Numerator ``P(z)`` of ``Xi * Psi_g^2 * prod (z - e_i)^l_i`` as a polynomial in ``z = wp(x)``."""
        d = self.data
        L = d.lattice
        es = L.e
        Z = Polynomial([0, 1])
        one = Polynomial([1])
        common = one
        for rk, bk in zip(d.r, d.b):
            common = common * (Z - bk) ** rk
        for i in (1, 2, 3):
            common = common * (Z - es[i - 1]) ** d.l[i]
        total = Polynomial([0j])
        for c, (kind, i, m) in zip(self.coef, self.labels):
            if kind == "c":
                term = common
            elif kind == "b" and i == 0:
                term = Z**m * common
            elif kind == "b":
                ei = es[i - 1]
                ej, ek = [e for j, e in enumerate(es) if j != i - 1]
                # wp(x + omega_i) = e_i + (e_i - e_j)(e_i - e_k) / (z - e_i)
                rest = one
                for ii in (1, 2, 3):
                    if ii != i:
                        rest = rest * (Z - es[ii - 1]) ** d.l[ii]
                for rk, bk in zip(d.r, d.b):
                    rest = rest * (Z - bk) ** rk
                li = d.l[i]
                term = ((Z - ei) * ei + (ei - ej) * (ei - ek)) ** m * (Z - ei) ** (li - m) * rest
            else:
                rest = one
                for kk, (rk, bk) in enumerate(zip(d.r, d.b)):
                    rest = rest * (Z - bk) ** (rk - m if kk == i else rk)
                for ii in (1, 2, 3):
                    rest = rest * (Z - es[ii - 1]) ** d.l[ii]
                term = rest
            total = total + c * term
        return total

    def z_denominator(self) -> Polynomial:
        d = self.data
        Z = Polynomial([0, 1])
        den = Polynomial([1])
        for rk, bk in zip(d.r, d.b):
            den = den * (Z - bk) ** rk
        for i in (1, 2, 3):
            den = den * (Z - d.lattice.e_of(i)) ** d.l[i]
        return den


def build_xi(d: FuchsianData, seed: int = SEED, check_apparent: bool = True) -> XiFunction:
    """Even doubly periodic solution of the symmetric-square equation for ``d``."""
    if check_apparent and d.M:
        ok, wit = is_apparent(d)
        if not ok:
            raise NotApparent(f"extra singular points are not apparent (witness {max(abs(w) for w in wit):.3e})")
    labels = tuple(_basis_labels(d))
    n = len(labels)
    x = _sample_points(d, 4 * n, seed)
    A, S = _operator_rows(d, x, labels)
    # scale by term magnitudes, not by A itself: a column can cancel exactly
    cs = np.linalg.norm(S, axis=0)
    cs[cs == 0] = 1.0
    A = A / cs[None, :]
    S = S / cs[None, :]
    rs = np.max(np.abs(S), axis=1)
    rs[rs == 0] = 1.0
    A = A / rs[:, None]
    _, sv, vh = np.linalg.svd(A)
    if len(sv) < n:
        sv = np.concatenate([sv, np.zeros(n - len(sv))])
    # an identically vanishing operator (v = 0, constant basis) leaves everything null
    ratio = sv / sv[0] if sv[0] > 0 else np.zeros_like(sv)
    null = np.nonzero(ratio < NULL_TOL)[0]
    if len(null) == 0:
        raise EmptyNullspace(f"no null vector (smallest singular value ratio {ratio[-1]:.3e})")
    vecs = []
    for idx in null:
        c = vh[idx].conj() / cs
        c = c / c[np.argmax(np.abs(c))]
        vecs.append(c)
    basis = np.array(vecs)
    xi = XiFunction(d, labels, basis[0], basis, sv, 0.0)
    held = _sample_points(d, 2 * 4 * n, seed + 1)
    res = max(xi.with_coef(b).operator_residual(held) for b in basis)
    return XiFunction(d, labels, basis[0], basis, sv, res)


def q_samples(xi: XiFunction, x) -> np.ndarray:
    d = xi.data
    X0, X1, X2 = xi.derivatives(np.atleast_1d(x), 2)
    v = np.asarray(d.potential(np.atleast_1d(x)))
    return X0**2 * (d.E - v) + 0.5 * X0 * X2 - 0.25 * X1**2


def q_value(xi: XiFunction, seed: int = SEED + 7, npts: int = 10, tol: float = 1e-8) -> complex:
    """The invariant ``Q = Xi^2 (E - v) + Xi Xi''/2 - Xi'^2/4``, checked for constancy."""
    d = xi.data
    x = _sample_points(d, npts, seed, guard=0.1)
    X0, X1, X2 = xi.derivatives(x, 2)
    v = np.asarray(d.potential(x))
    terms = [X0**2 * (d.E - v), 0.5 * X0 * X2, 0.25 * X1**2]
    Q = terms[0] + terms[1] - terms[2]
    mean = complex(np.mean(Q))
    scale = max(abs(mean), float(np.max(sum(np.abs(t) for t in terms))) * 1e-3)
    spread = float(np.max(np.abs(Q - mean))) / scale
    if spread > tol:
        raise NonConstantQ(f"Q varies along the cell (relative spread {spread:.3e})")
    return mean
