"""Command-line front end.

Units throughout: momenta in mc, energies in mc^2, lengths in reduced
Compton wavelengths (one Bohr radius is 1/alpha_s).

Every JSON document carries a ``schema`` field and is written with sorted
keys, so identical inputs give byte-identical output. Exit codes: 0 on
success, 1 on invalid input, 2 on numeric failure (including solver
non-convergence); errors are reported as JSON on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

ERROR_SCHEMA = "reltfw.error/1"
UNITS = {"momentum": "mc", "energy": "mc^2", "length": "reduced Compton wavelength"}


class UsageError(Exception):
    pass


class NumericFailure(Exception):
    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _clean(obj):
    """Plain JSON types; non-finite floats become null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def canonical_json(obj):
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- validators

def _positive(s):
    v = float(s)
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {s!r}")
    return v


def _nonneg(s):
    v = float(s)
    if not (math.isfinite(v) and v >= 0):
        raise argparse.ArgumentTypeError(f"expected a nonnegative number, got {s!r}")
    return v


def _pos_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s!r}")
    return v


def _grid_n(s):
    v = int(s)
    if v < 10:
        raise argparse.ArgumentTypeError("grid needs at least 10 nodes")
    return v


# ---------------------------------------------------------------- commands

def cmd_constants(args):
    from .ionization import bound_coefficient
    from .special_functions import min_g, minimize_H
    from .stability_bound import C_SOBOLEV
    from .thomas_fermi import get_e_tf
    from .params import ALPHA_PHYSICAL

    h = minimize_H()
    s_g, c_g = min_g()
    tf = get_e_tf()
    doc = {
        "schema": "reltfw.constants/1",
        "a": h.a,
        "b": h.b,
        "s_star": h.s_star,
        "bound_coefficient": bound_coefficient(),
        "c_g": c_g,
        "s_g": s_g,
        "e_tf": tf.e_tf,
        "e_tf_shooting": tf.shooting,
        "c_s": C_SOBOLEV,
        "alpha_physical": ALPHA_PHYSICAL,
        "units": UNITS,
    }
    _emit(canonical_json(doc), args.out)


def cmd_table(args):
    from . import special_functions as sf

    if args.t_min >= args.t_max:
        raise UsageError("--t-min must be below --t-max")
    t = np.geomspace(args.t_min, args.t_max, args.n)
    cols = {
        "t": t,
        "f": sf.f(t),
        "F": sf.F(t),
        "H": sf.H(t),
        "t_tf": sf.t_tf(t),
        "g": sf.g(t),
    }
    if args.format == "json":
        _emit(canonical_json({"schema": "reltfw.table/1", "columns": cols}), args.out)
        return
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(cols))
    for row in zip(*cols.values()):
        w.writerow([repr(float(v)) for v in row])
    _emit(buf.getvalue(), args.out)


def cmd_verify_bounds(args):
    from .special_functions import appendix_bounds_report, phase_space_report

    sample = np.geomspace(args.t_min, args.t_max, args.samples)
    app = appendix_bounds_report(sample)
    ps = phase_space_report(sample)
    doc = {
        "schema": "reltfw.verify_bounds/1",
        "samples": args.samples,
        "t_min": args.t_min,
        "t_max": args.t_max,
        "appendix": app,
        "phase_space": ps,
        "all_passed": bool(app["all_passed"] and ps["all_passed"]),
    }
    text = canonical_json(doc)
    _emit(text, args.out)
    if not doc["all_passed"]:
        raise NumericFailure("bound verification failed", doc)


def cmd_cutoff(args):
    from .cutoff_radii import R_of_beta, R_tilde

    res = R_of_beta(args.beta)
    doc = {"schema": "reltfw.cutoff/1", "beta": args.beta, "R_beta": res.r_min,
           "F_beta_min": res.value}
    if args.alpha is not None:
        rt = R_tilde(args.alpha, args.beta)
        doc.update(alpha=args.alpha, R_tilde=rt.r_min, F_tilde_min=rt.value)
    _emit(canonical_json(doc), args.out)


def cmd_stability_bound(args):
    from .stability_bound import stability_constant

    rep = stability_constant(args.lam, tuple(args.Z), args.Z_inf, args.K, args.N, args.alpha_s)
    _emit(canonical_json(rep.to_dict()), args.out)


def _solver_options(args):
    from .radial import SolverOptions

    return SolverOptions(tol=args.tol, maxiter=args.maxiter)


def _grid(args):
    from .radial import default_grid

    return default_grid(args.alpha_s, n=args.grid_n, r_min=args.grid_rmin, r_max=args.grid_rmax)


def cmd_solve_atom(args):
    from .params import PhysicalParams
    from .radial import minimize

    params = PhysicalParams(lam=args.lam, alpha_s=args.alpha_s, Z_list=(args.Z,), N=args.N)
    res = minimize(params, _grid(args), _solver_options(args))
    doc = res.to_dict(include_chi=args.include_chi)
    doc["schema"] = "reltfw.solve_atom/1"
    doc["units"] = UNITS
    if args.profile:
        prof = res.profile()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "chi", "p", "rho", "hartree_potential"])
        for row in prof:
            w.writerow([repr(float(v)) for v in row])
        Path(args.profile).write_text(buf.getvalue())
    _emit(canonical_json(doc), args.out)
    if not res.converged:
        raise NumericFailure("solver did not converge", {"iterations": res.iterations})


def cmd_ionize(args):
    from .ionization import ionization_bound

    if args.analytic:
        reports = [ionization_bound(Z).to_dict() for Z in args.Z]
        _emit(canonical_json({"schema": "reltfw.ionize/1", "analytic_only": True,
                              "results": reports}), args.out)
        return
    from .radial import scan_max_ionization

    scans = scan_max_ionization(args.Z, args.lam, args.alpha_s, n=args.grid_n,
                                options=_solver_options(args), jobs=args.jobs)
    results = []
    for Z, scan in zip(args.Z, scans):
        rep = ionization_bound(Z, scan.N_max)
        results.append({"scan": scan.to_dict(), "bound": rep.to_dict(),
                        "within_bracket": rep.consistent()})
    doc = {"schema": "reltfw.ionize/1", "analytic_only": False, "lambda": args.lam,
           "alpha_s": args.alpha_s, "grid_n": args.grid_n, "results": results}
    _emit(canonical_json(doc), args.out)
    if not all(s.converged for s in scans):
        raise NumericFailure("a bisection leg did not converge")


# ---------------------------------------------------------------- parser

def _physics_flags(p, with_N=True):
    from .params import ALPHA_PHYSICAL

    p.add_argument("--lambda", dest="lam", type=_positive, default=1.0,
                   help="Weizsacker coefficient (default 1)")
    p.add_argument("--alpha-s", dest="alpha_s", type=_positive, default=ALPHA_PHYSICAL,
                   help="fine-structure constant (default 1/137.036)")
    if with_N:
        p.add_argument("--N", type=_nonneg, default=None,
                       help="particle-number bound (default: N = Z)")


def _solver_flags(p):
    p.add_argument("--grid-n", type=_grid_n, default=2000, help="number of radial nodes")
    p.add_argument("--tol", type=_positive, default=1e-8,
                   help="relative gradient tolerance (dimensionless)")
    p.add_argument("--maxiter", type=_pos_int, default=5000, help="iterations per inner solve")


def build_parser():
    parser = _Parser(
        prog="reltfw",
        description="Relativistic TFW functional: constants, bounds and atomic minimizers. "
        "Units: momenta in mc, energies in mc^2, lengths in reduced Compton wavelengths.",
    )
    parser.add_argument("--config", help="JSON or key=value file; explicit flags take precedence")
    parser.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, helptext):
        p = sub.add_parser(name, help=helptext, description=helptext)
        p.add_argument("--out", help="write output here instead of stdout")
        return p

    add("constants", "a, b, s*, 2/sqrt(a), c_g and e_tf (dimensionless)").set_defaults(
        func=cmd_constants)

    p = add("table", "tabulate f, F, H, t^TF and g against the momentum t (units of mc)")
    p.add_argument("--n", type=_pos_int, default=200)
    p.add_argument("--t-min", type=_positive, default=1e-3)
    p.add_argument("--t-max", type=_positive, default=1e3)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_table)

    p = add("verify-bounds", "check the special-function inequalities on a log grid of momenta")
    p.add_argument("--samples", type=_pos_int, default=10000)
    p.add_argument("--t-min", type=_positive, default=1e-8)
    p.add_argument("--t-max", type=_positive, default=1e8)
    p.set_defaults(func=cmd_verify_bounds)

    p = add("cutoff", "cut-off radii R_beta and R~_{alpha,beta} (units of mc)")
    p.add_argument("--beta", type=_positive, required=True)
    p.add_argument("--alpha", type=_positive, default=None)
    p.set_defaults(func=cmd_cutoff)

    p = add("stability-bound", "lower bound -N - C(A) on the energy (units of mc^2)")
    _physics_flags(p, with_N=False)
    p.add_argument("--Z", type=_nonneg, nargs="*", default=[1.0], help="nuclear charges")
    p.add_argument("--Z-inf", dest="Z_inf", type=_positive, default=None)
    p.add_argument("--K", type=_pos_int, default=None, help="number of nuclei for the uniform form")
    p.add_argument("--N", type=_nonneg, default=1.0)
    p.set_defaults(func=cmd_stability_bound)

    p = add("solve-atom", "minimize the atomic functional (energies in mc^2, "
            "radii in reduced Compton wavelengths)")
    _physics_flags(p)
    p.add_argument("--Z", type=_nonneg, default=1.0, help="nuclear charge")
    _solver_flags(p)
    p.add_argument("--grid-rmin", type=_positive, default=None,
                   help="innermost node (default 1e-5 Bohr radii)")
    p.add_argument("--grid-rmax", type=_positive, default=None,
                   help="outer radius (default 60 Bohr radii)")
    p.add_argument("--profile", help="write r, chi, p, rho, hartree_potential as CSV")
    p.add_argument("--include-chi", action="store_true")
    p.set_defaults(func=cmd_solve_atom)

    p = add("ionize", "largest bound particle number N_max by bisection over [Z, 4Z]")
    _physics_flags(p, with_N=False)
    p.add_argument("--Z", type=_positive, nargs="+", default=[1.0])
    _solver_flags(p)
    p.add_argument("--jobs", type=_pos_int, default=1, help="parallel workers across charges")
    p.add_argument("--analytic", action="store_true", help="only the analytic bound 2/sqrt(a) Z")
    p.set_defaults(func=cmd_ionize)
    return parser


def _read_config(path):
    text = Path(path).read_text()
    try:
        data = json.loads(text)
        if not isinstance(data, dict):
            raise UsageError("config JSON must be an object")
        return data
    except json.JSONDecodeError:
        pass
    data = {}
    for k, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {k}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        data[key] = value
    return data


def _apply_config(parser, argv, cfg):
    """Install config values as subcommand defaults, so explicit flags still win."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    pre.add_argument("--log-level")
    pre.add_argument("command", nargs="?")
    known, _ = pre.parse_known_args(argv)
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    if known.command not in sub.choices:
        return
    sp = sub.choices[known.command]
    actions = {a.dest: a for a in sp._actions}
    defaults = {}
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        dest = "lam" if dest == "lambda" else dest
        if dest not in actions or dest in ("help", "func"):
            raise UsageError(f"unknown config key {key!r} for {known.command}")
        act = actions[dest]
        if isinstance(value, str) and act.type is not None:
            items = value.replace(",", " ").split() if act.nargs in ("*", "+") else [value]
            try:
                conv = [act.type(v) for v in items]
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise UsageError(f"config key {key!r}: {exc}") from exc
            value = conv if act.nargs in ("*", "+") else conv[0]
        elif act.type is not None and value is not None:
            try:
                value = ([act.type(str(v)) for v in value] if act.nargs in ("*", "+")
                         else act.type(str(value)))
            except (argparse.ArgumentTypeError, ValueError, TypeError) as exc:
                raise UsageError(f"config key {key!r}: {exc}") from exc
        defaults[dest] = value
        act.required = False
    sp.set_defaults(**defaults)


def _fail(kind, message, code, payload=None):
    doc = {"schema": ERROR_SCHEMA, "error": kind, "message": message}
    if payload is not None:
        doc["details"] = payload
    sys.stderr.write(canonical_json(doc))
    return code


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        pre = argparse.ArgumentParser(add_help=False)
        pre.add_argument("--config")
        cfg_path = pre.parse_known_args(argv)[0].config
        if cfg_path:
            _apply_config(parser, argv, _read_config(cfg_path))
        args = parser.parse_args(argv)
        logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING))
        if getattr(args, "N", 0.0) is None:
            args.N = args.Z
        args.func(args)
    except UsageError as exc:
        return _fail("usage", str(exc), 1)
    except (ValueError, OSError) as exc:
        return _fail("validation", str(exc), 1)
    except NumericFailure as exc:
        return _fail("numeric", str(exc), 2, exc.payload)
    except (RuntimeError, FloatingPointError, ArithmeticError) as exc:
        return _fail("numeric", str(exc), 2)
    except Exception as exc:  # noqa: BLE001 - still report as JSON
        return _fail("internal", f"{type(exc).__name__}: {exc}", 2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
