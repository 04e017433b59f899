"""Command line interface.

Complex numbers are passed as ``re,im`` (or a bare real) and written to JSON
as ``[re, im]``.  Every JSON document carries the resolved arguments under
``"config"``.  Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .elliptic import lattice_from_tau, make_lattice
from .errors import NumericalError, ValidationError
from .finite_gap import G_MAX, band_edge_multipliers, edge_deviation, spectral_poly_m0, spectral_poly_m1r2, treibich_b1_roots
from .fuchsian import algebraic_from_elliptic, fuchsian_m1r1, is_apparent
from .hk.integral import Continuation, ode_residual
from .hk.monodromy import hk_data
from .hk.xi import SEED, build_xi, q_value
from .painleve6 import (
    hitchin_b1,
    kappas_from_l,
    l01_b1,
    l01_degenerate,
    riccati_b1,
    verify_p6,
    verify_p6_elliptic,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def cplx(text: str) -> complex:
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected 're,im', got {text!r}")


def int_list(text: str) -> tuple:
    if text.strip() == "":
        return ()
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from None


def jsonable(obj):
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [jsonable(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(x) for x in obj]
    return obj


# ---------------------------------------------------------------- shared options


def _add_lattice(p):
    p.add_argument("--tau", type=cplx, help="tau (omega1 = 1/2, omega3 = tau/2)")
    p.add_argument("--omega1", type=cplx)
    p.add_argument("--omega3", type=cplx)


def _lattice(args):
    if args.omega1 is not None or args.omega3 is not None:
        if args.omega1 is None or args.omega3 is None or args.tau is not None:
            raise ValidationError("give either --tau or both --omega1 and --omega3")
        return make_lattice(args.omega1, args.omega3)
    if args.tau is None:
        raise ValidationError("a lattice is required (--tau or --omega1/--omega3)")
    return lattice_from_tau(args.tau)


def _add_fuchsian(p):
    _add_lattice(p)
    p.add_argument("--l", type=int_list, default=(0, 0, 0, 0), help="l0,l1,l2,l3")
    p.add_argument("--r", type=int_list, default=(), help="r_1,...,r_M")
    p.add_argument("--b", type=cplx, action="append", default=[], help="b_k = wp(delta_k), repeat per point")
    p.add_argument("--s", type=cplx, action="append", default=[], help="accessory s_k, repeat per point")
    p.add_argument("--E", type=cplx, default=0j, help="eigenvalue of the elliptic form")
    p.add_argument("--mu1", type=cplx, help="M = 1, r = 1 only: fix s and E through mu1 (apparent by construction)")


def _fuchsian(args):
    L = _lattice(args)
    if args.mu1 is not None:
        if tuple(args.r) != (1,) or len(args.b) != 1:
            raise ValidationError("--mu1 needs --r 1 and a single --b")
        return fuchsian_m1r1(args.l, args.b[0], args.mu1, L)
    if len(args.s) != len(args.r):
        raise ValidationError("need one --s per extra singular point")
    return algebraic_from_elliptic(args.l, args.r, args.b, args.s, args.E, L)


def _seed(args) -> int:
    env = os.environ.get("HEUNHK_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValidationError(f"HEUNHK_SEED must be an integer, got {env!r}") from None
    return args.seed


# ---------------------------------------------------------------- commands


def cmd_lattice(args):
    L = _lattice(args)
    return {
        "omega1": L.omega1, "omega3": L.omega3, "tau": L.tau, "e": list(L.e), "eta": list(L.eta),
        "g2": L.g2, "g3": L.g3, "legendre_residual": L.legendre_residual,
    }


def cmd_apparency(args):
    d = _fuchsian(args)
    ok, wit = is_apparent(d, tol=args.tol)
    return {
        "apparent": ok, "witnesses": list(wit), "s": list(d.s), "s_tilde": list(d.s_tilde), "o": list(d.o),
        "E": d.E, "p": d.p, "Cg": d.Cg, "delta": list(d.delta),
    }


def _xi(args):
    d = _fuchsian(args)
    return d, build_xi(d, seed=args.seed_resolved)


def cmd_xi(args):
    d, xi = _xi(args)
    out = {
        "labels": [list(lab) for lab in xi.labels], "coef": xi.coef, "basis": xi.basis,
        "nullspace_dim": xi.nullspace_dim, "residual": xi.residual, "E": d.E,
    }
    out["Q"] = q_value(xi) if xi.nullspace_dim == 1 else None
    return out


def _sqrt(Q, sign):
    return sign * complex(np.sqrt(-complex(Q)))


def cmd_monodromy(args):
    d, xi = _xi(args)
    if xi.nullspace_dim != 1:
        raise ValidationError(f"monodromy needs a one-dimensional space of Xi (found {xi.nullspace_dim})")
    Q = q_value(xi)
    hk, _ = hk_data(xi, _sqrt(Q, args.sqrt_sign))
    out = hk.as_dict()
    out["nullspace_dim"] = xi.nullspace_dim
    out["multipliers"] = list(hk.multipliers)
    return out


def cmd_solve(args):
    d, xi = _xi(args)
    if xi.nullspace_dim != 1:
        raise ValidationError(f"solve needs a one-dimensional space of Xi (found {xi.nullspace_dim})")
    Q = q_value(xi)
    cont = Continuation(xi, _sqrt(Q, args.sqrt_sign))
    rows = []
    for k in range(args.n):
        x = args.x_start + (args.x_end - args.x_start) * (k / max(args.n - 1, 1))
        lam, _ = cont.lam(x)
        rows.append({"x": complex(x), "lambda": complex(lam), "residual": ode_residual(cont, x)})
    return {"rows": rows, "Q": Q, "x0": cont.x0, "_csv": (["x_re", "x_im", "lambda_re", "lambda_im", "residual"], [
        [r["x"].real, r["x"].imag, r["lambda"].real, r["lambda"].imag, r["residual"]] for r in rows])}


_P6_KAPPAS = {"hitchin": (0, 0, 0, 0), "riccati": (0, 0, 0, 0), "l01": (1, 0, 0, 0)}


def _p6_func(args, kind):
    if kind == "hitchin":
        return lambda tau: hitchin_b1(args.C1, args.C3, tau)
    if kind == "riccati":
        return lambda tau: riccati_b1(args.D1, args.D3, tau, args.family)
    if kind == "l01":
        if args.family is not None:
            if args.D1 is None or args.D3 is None:
                raise ValidationError("degenerate l01 families need --D1 and --D3")
            return lambda tau: l01_degenerate(args.D1, args.D3, tau, args.family)
        return lambda tau: l01_b1(args.C1, args.C3, tau)
    raise ValidationError(f"unknown p6 family {kind!r}")


def _need(args, *names):
    for n in names:
        if getattr(args, n, None) is None:
            raise ValidationError(f"--{n} is required")


def _p6_point(f, l, tau, check):
    L = lattice_from_tau(tau)
    e1, e2, e3 = L.e
    b1 = f(tau)
    out = {"tau": tau, "b1": b1, "lambda": (b1 - e1) / (e2 - e1), "t": (e3 - e1) / (e2 - e1)}
    if check:
        out["residual_p6"] = verify_p6(f, kappas_from_l(l), tau)
        out["residual_elliptic"] = verify_p6_elliptic(f, l, tau)
    return out


def _p6_sweep(f, l, t0, t1, n):
    rows = []
    for k in range(n):
        tau = t0 + (t1 - t0) * (k / max(n - 1, 1))
        r = _p6_point(f, l, tau, True)
        rows.append(r)
    return {"rows": rows, "_csv": (["tau_re", "tau_im", "t_re", "t_im", "lambda_re", "lambda_im", "residual"], [
        [r["tau"].real, r["tau"].imag, r["t"].real, r["t"].imag, r["lambda"].real, r["lambda"].imag, r["residual_p6"]]
        for r in rows])}


def cmd_p6(args):
    kind = args.kind if args.p6cmd == "sweep" else args.p6cmd
    if kind in ("hitchin",) or (kind == "l01" and args.family is None):
        _need(args, "C1", "C3")
    if kind == "riccati":
        _need(args, "D1", "D3")
        if args.family is None:
            args.family = "zero"
    f = _p6_func(args, kind)
    l = _P6_KAPPAS[kind]
    if args.p6cmd == "sweep":
        return _p6_sweep(f, l, args.tau_start, args.tau_end, args.n)
    if args.sweep is not None:
        t0, t1, n = args.sweep
        return _p6_sweep(f, l, cplx(t0), cplx(t1), int(n))
    if args.tau is None:
        raise ValidationError("--tau is required")
    return _p6_point(f, l, args.tau, args.check)


def _spectral_out(sd, check_edges):
    out = {
        "g": sd.g, "Q_coeffs": sd.Q_poly, "band_edges": list(sd.band_edges), "fit_residual": sd.fit_residual,
        "Q_leading_before_normalisation": sd.leading,
    }
    if check_edges:
        m = band_edge_multipliers(sd)
        out["edge_multipliers"] = [list(pair) for pair in m]
        out["edge_deviation"] = edge_deviation(m)
    return out


def cmd_finitegap(args):
    L = _lattice(args)
    seed = args.seed_resolved
    if args.fgcmd == "m0":
        return _spectral_out(spectral_poly_m0(args.l, L, seed=seed, g_max=args.g_max), args.check_edges)
    roots = treibich_b1_roots(args.l, L, seed=seed)
    if not 0 <= args.root_index < len(roots):
        raise ValidationError(f"--root-index must be in [0, {len(roots)})")
    out = _spectral_out(spectral_poly_m1r2(args.l, roots[args.root_index], L, seed=seed, g_max=args.g_max), args.check_edges)
    out["b1_roots"] = roots
    out["b1"] = roots[args.root_index]
    return out


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=SEED, help="collocation seed (HEUNHK_SEED overrides)")
    common.add_argument("--output", "-o", help="write to this file instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default=None)

    p = _Parser(prog="heunhk", description="Fuchsian equations with elliptic coefficients: Xi, monodromy, PVI, finite gap.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    q = sub.add_parser("lattice", parents=[common], help="lattice constants")
    _add_lattice(q)
    q.set_defaults(func=cmd_lattice)

    q = sub.add_parser("apparency", parents=[common], help="apparency test of the extra singular points")
    _add_fuchsian(q)
    q.add_argument("--tol", type=float, default=1e-9)
    q.set_defaults(func=cmd_apparency)

    for name, func, help_ in (
        ("xi", cmd_xi, "doubly periodic solution Xi and Q"),
        ("monodromy", cmd_monodromy, "monodromy exponents and Hermite-Krichever data"),
        ("solve", cmd_solve, "Lambda along a segment (CSV)"),
    ):
        q = sub.add_parser(name, parents=[common], help=help_)
        _add_fuchsian(q)
        if name != "xi":
            q.add_argument("--sqrt-sign", type=int, choices=(1, -1), default=1, help="sign of sqrt(-Q)")
        if name == "solve":
            q.add_argument("--x-start", type=cplx, default=complex(0.11, 0.07))
            q.add_argument("--x-end", type=cplx, default=complex(0.37, 0.21))
            q.add_argument("--n", type=int, default=11)
        q.set_defaults(func=func)

    q = sub.add_parser("p6", help="closed form Painleve VI solutions")
    p6 = q.add_subparsers(dest="p6cmd", required=True, parser_class=_Parser)
    for name in ("hitchin", "riccati", "l01", "sweep"):
        r = p6.add_parser(name, parents=[common])
        if name == "sweep":
            r.add_argument("--kind", choices=("hitchin", "riccati", "l01"), required=True)
            r.add_argument("--tau-start", type=cplx, required=True)
            r.add_argument("--tau-end", type=cplx, required=True)
            r.add_argument("--n", type=int, default=5)
        else:
            r.add_argument("--tau", type=cplx)
            r.add_argument("--check", action="store_true", help="add PVI residuals")
            r.add_argument("--sweep", nargs=3, metavar=("TAU_START", "TAU_END", "N"))
        r.add_argument("--C1", type=cplx)
        r.add_argument("--C3", type=cplx)
        r.add_argument("--D1", type=cplx)
        r.add_argument("--D3", type=cplx)
        r.add_argument("--family", choices=("zero", "e1", "e2", "e3"))
        r.set_defaults(func=cmd_p6)

    q = sub.add_parser("finitegap", help="spectral polynomials of finite-gap potentials")
    fg = q.add_subparsers(dest="fgcmd", required=True, parser_class=_Parser)
    for name in ("m0", "m1r2"):
        r = fg.add_parser(name, parents=[common])
        _add_lattice(r)
        r.add_argument("--l", type=int_list, default=(0, 0, 0, 0))
        r.add_argument("--check-edges", action="store_true", help="measure multipliers at the band edges")
        r.add_argument("--g-max", type=int, default=G_MAX, help="largest genus tried")
        if name == "m1r2":
            r.add_argument("--root-index", type=int, default=0)
        r.set_defaults(func=cmd_finitegap)
    return p


def _config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "seed_resolved", "output")}
    cfg["seed"] = args.seed_resolved
    return jsonable(cfg)


def _render(result, args) -> str:
    fmt = args.format or ("csv" if "_csv" in result and args.cmd == "solve" or getattr(args, "p6cmd", None) == "sweep" else "json")
    table = result.pop("_csv", None)
    if fmt == "csv":
        if table is None:
            raise ValidationError("this command has no CSV output")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(table[0])
        for row in table[1]:
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()
    doc = {"config": _config(args)}
    doc.update(jsonable(result))
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _fail(kind: str, exc: Exception, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "type": type(exc).__name__, "message": str(exc)}, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        args.seed_resolved = _seed(args)
        text = _render(args.func(args), args)
    except ValidationError as exc:
        return _fail("validation", exc, 2)
    except NumericalError as exc:
        return _fail("numerical", exc, 3)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
