"""Command-line front end.

Exit codes: 0 success, 2 argument error, 3 a checked property failed,
4 a convergence or evaluation failure.
"""

from __future__ import annotations

import argparse
import math
import sys

from . import __version__
from .activations import builtin, classify
from .errors import (
    ActsigError, ArgumentError, CapabilityError, DomainError, MetadataError, PropertyFailure,
)
from .golden import GOLDEN, GOLDEN_ACTIVATIONS, GOLDEN_SIGMAS, GOLDEN_TOLERANCE
from .kernel import bound_stress
from .lyapunov import certify_contraction, chebyshev_probes, f_lyapunov_descent, verify_descent
from .montecarlo import mc_components
from .propagation import axis, bias_drift_check, criticality_scan, crude_bias_bound, solve_fixed_point
from .quadrature import DEFAULT_ORDER, build_rule
from .rng import check_seed
from .serialize import dumps, to_csv
from .signature import GAUSSIAN, full_signature, gaussian_components

DEFAULT_SIGMAS = (0.5, 1.0, 2.0)
EXIT_ARGUMENT, EXIT_PROPERTY, EXIT_CONVERGENCE = 2, 3, 4


def _range(text: str) -> tuple:
    """Parse start:end:count (inclusive) or a single number."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            v = float(parts[0])
            return (v,)
        if len(parts) == 3:
            return axis(float(parts[0]), float(parts[1]), int(parts[2]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected start:end:count, got {text!r}")


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be a positive number: {text!r}")
    return v


def _names(values):
    out = []
    for v in values or ():
        out.extend(s for s in v.split(",") if s)
    return out


class _Output:
    def __init__(self, args, default_format):
        self.format = args.format or default_format
        self.path = args.out

    def emit(self, json_obj, csv_header=None, csv_rows=None):
        if self.format == "csv":
            if csv_header is None:
                raise ArgumentError("this subcommand has no CSV rendering")
            text = to_csv(csv_header, csv_rows)
        else:
            text = dumps(json_obj)
        if self.path:
            with open(self.path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)


# --- subcommands -------------------------------------------------------------

SIG_KEYS = ("name", "sigma", "m1", "g1", "g2", "m2", "eta", "alpha_plus", "alpha_minus",
            "tv", "c_phi", "g4", "m2_prime", "order")


def cmd_signature(args):
    records = [
        full_signature(builtin(name), s, args.order).to_dict()
        for name in _names(args.activation) for s in (args.sigma or DEFAULT_SIGMAS)
    ]
    _Output(args, "json").emit(records, SIG_KEYS, ([r[k] for k in SIG_KEYS] for r in records))
    return 0


def table_rows(activations, sigmas, order):
    rule = build_rule(order)
    rows = []
    for name in sorted(activations):
        act = builtin(name)
        for s in sorted(sigmas):
            g = gaussian_components(act, s, rule)
            rows.append((name, s, g.m1, g.g1, g.g2, g.m2, g.eta))
    return rows


def golden_deviation(rows):
    """Max |computed - reference| over rows present in the reference table."""
    worst, where, compared = 0.0, None, 0
    for name, s, *vals in rows:
        ref = GOLDEN.get((name, float(s)))
        if ref is None:
            continue
        for comp, v, r in zip(GAUSSIAN, vals, ref):
            compared += 1
            if abs(v - r) > worst:
                worst, where = abs(v - r), f"{name} sigma={s:g} {comp}"
    return worst, where, compared


def cmd_table(args):
    acts = _names(args.activations) or list(GOLDEN_ACTIVATIONS)
    sigmas = args.sigmas or GOLDEN_SIGMAS
    rows = table_rows(acts, sigmas, args.order)
    header = ("activation", "sigma", *GAUSSIAN)
    doc = {"rows": [dict(zip(header, r)) for r in rows]}
    status = 0
    if args.golden:
        worst, where, compared = golden_deviation(rows)
        ok = compared > 0 and worst < GOLDEN_TOLERANCE
        doc["golden"] = {"compared": compared, "max_abs_deviation": worst, "worst_cell": where,
                         "tolerance": GOLDEN_TOLERANCE, "passed": ok}
        print(f"golden: compared {compared} cells, max |deviation| = {worst:.3e} at {where}; "
              f"{'PASS' if ok else 'FAIL'} (tolerance {GOLDEN_TOLERANCE:g})", file=sys.stderr)
        status = 0 if ok else EXIT_PROPERTY
    _Output(args, "csv").emit(doc, header, rows)
    return status


def cmd_classify(args):
    records = []
    for name in _names(args.activation):
        act = builtin(name)
        cls = classify(act)
        records.append({"name": act.name, "alpha_plus": act.alpha_plus, "alpha_minus": act.alpha_minus,
                        "class": cls.family, "label": cls.label, "taxonomy": str(cls)})
    header = ("name", "alpha_plus", "alpha_minus", "class", "label", "taxonomy")
    _Output(args, "json").emit(records, header, ([r[k] for k in header] for r in records))
    return 0


def cmd_mc(args):
    rule = build_rule(args.order)
    records = []
    worst = 0.0
    for name in _names(args.activation):
        act = builtin(name)
        for s in args.sigma or (1.0,):
            est = mc_components(act, s, args.samples, args.seed)
            ref = gaussian_components(act, s, rule)._asdict()
            for comp, e in est.items():
                z = e.z_score(ref[comp])
                worst = max(worst, abs(z))
                records.append({"activation": act.name, "sigma": s, "component": comp, "value": e.value,
                                "std_error": e.std_error, "samples": e.samples, "seed": e.seed,
                                "quadrature_ref": ref[comp], "z_score": z})
    header = ("activation", "sigma", "component", "value", "std_error", "samples", "seed", "quadrature_ref", "z_score")
    _Output(args, "json").emit(records, header, ([r[k] for k in header] for r in records))
    return EXIT_PROPERTY if worst >= args.z_max else 0


def cmd_propagate(args):
    act = builtin(args.activation)
    rep = solve_fixed_point(act, args.sigma_w, args.sigma_b, q0=args.q0, max_iters=args.max_iters, order=args.order)
    doc = {"activation": act.name, "sigma_w": args.sigma_w, "sigma_b": args.sigma_b, **rep.summary(),
           "iterations": rep.iterations, "method": rep.method, "trajectory": list(rep.trajectory)}
    header = ("iteration", "q")
    _Output(args, "json").emit(doc, header, enumerate(rep.trajectory))
    return 0 if rep.converged else EXIT_CONVERGENCE


def cmd_criticality(args):
    act = builtin(args.activation)
    grid = criticality_scan(act, args.sigma_w, args.sigma_b, q0=args.q0, order=args.order, max_iters=args.max_iters)
    boundary = grid.boundary()
    doc = {
        "activation": act.name,
        "sigma_w_axis": list(grid.sigma_w_axis),
        "sigma_b_axis": list(grid.sigma_b_axis),
        "cells": [
            {**grid.cells[i][j].summary(), "sigma_w": sw, "sigma_b": sb, "boundary": bool(boundary[i, j])}
            for i, sw in enumerate(grid.sigma_w_axis) for j, sb in enumerate(grid.sigma_b_axis)
        ],
    }
    _Output(args, "csv").emit(doc, grid.HEADER, grid.rows())
    return 0


def cmd_lyapunov(args):
    act = builtin(args.activation)
    cert = certify_contraction(act, args.a, args.b, args.sigma_ref, args.order)
    lo, hi, n = args.probes
    probes = chebyshev_probes(lo, hi, int(n))
    doc = {"activation": act.name, "a": cert.a, "b": cert.b, "L_T": cert.lipschitz_T, "x_star": cert.x_star,
           "c": cert.descent_constant, "is_contraction": cert.is_contraction, "l2_gain": cert.l2_gain,
           "sup_slope_approximate": cert.sup_slope_approximate}
    failed = False
    if cert.is_contraction:
        rep = verify_descent(cert, act, probes, c=args.c)
        doc.update(c=rep.constant, worst_slack=rep.worst_slack, violations=rep.to_dict()["violations"])
        failed = not rep.passed
    else:
        doc.update(worst_slack=None, violations=[])
    if args.f_lambda is not None:
        if args.b != 0:
            raise ArgumentError("the F-based check needs b = 0")
        frep = f_lyapunov_descent(act, args.a, args.f_lambda, probes, flipped=args.f_flipped)
        doc["f_based"] = frep.to_dict()
        failed = failed or not frep.passed
    _Output(args, "json").emit(doc)
    return EXIT_PROPERTY if failed else 0


def cmd_kernel(args):
    act = builtin(args.activation)
    reports, failures = bound_stress(act, args.dim, args.trials, args.samples, args.seed, args.order)
    records = [r.to_dict() for r in reports]
    header = ("dim", "norm_x", "norm_y", "g4_bound", "bv_bound", "mc_value", "mc_se", "satisfied")
    _Output(args, "json").emit(records, header, ([r[k] for k in header] for r in records))
    return EXIT_PROPERTY if failures else 0


def cmd_bias_drift(args):
    records = []
    for name in _names(args.activation):
        act = builtin(name)
        crude = crude_bias_bound(act)
        for s in args.sigma or DEFAULT_SIGMAS:
            r = bias_drift_check(act, s, args.order)
            records.append({"name": r.name, "sigma": r.sigma, "m1": r.m1, "lhs": r.lhs, "rhs": r.rhs,
                            "c_phi": r.c_phi, "holds": r.holds,
                            "crude_m1_bound": crude / (math.sqrt(2.0 * math.pi) * s)})
    header = ("name", "sigma", "m1", "lhs", "rhs", "c_phi", "holds", "crude_m1_bound")
    _Output(args, "json").emit(records, header, ([r[k] for k in header] for r in records))
    return 0 if all(r["holds"] for r in records) else EXIT_PROPERTY


# --- parser ------------------------------------------------------------------

def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--order", type=int, default=argparse.SUPPRESS, help=f"quadrature order (default {DEFAULT_ORDER})")
    p.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS, help="output format")
    p.add_argument("--out", default=argparse.SUPPRESS, help="write output to this file instead of stdout")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed (default 0)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="actsig", parents=[common],
        description="Integral signatures of activation functions under Gaussian inputs.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_, description=help_)
        p.set_defaults(func=func)
        return p

    acts = dict(action="extend", nargs="+", required=True, help="activation name(s), e.g. relu gelu leaky_relu(0.2)")
    sigmas = dict(action="extend", nargs="+", type=_positive, help="input scale(s)")

    p = add("signature", cmd_signature, "nine-component signature per (activation, sigma)")
    p.add_argument("--activation", **acts)
    p.add_argument("--sigma", **sigmas)

    p = add("table", cmd_table, "Gaussian components table (CSV by default)")
    p.add_argument("--activations", action="extend", nargs="+", help="subset of activations")
    p.add_argument("--sigmas", **sigmas)
    p.add_argument("--golden", action="store_true", help="compare with the embedded reference table")

    p = add("classify", cmd_classify, "taxonomy class from the asymptotic slopes")
    p.add_argument("--activation", **acts)

    p = add("mc", cmd_mc, "Monte Carlo cross-check of the Gaussian components")
    p.add_argument("--activation", **acts)
    p.add_argument("--sigma", **sigmas)
    p.add_argument("--samples", type=int, default=300000)
    p.add_argument("--z-max", type=float, default=4.0, help="fail (exit 3) when any |z| reaches this")

    p = add("propagate", cmd_propagate, "fixed point of the mean-field variance recursion")
    p.add_argument("--activation", required=True)
    p.add_argument("--sigma-w", type=_positive, required=True)
    p.add_argument("--sigma-b", type=float, default=0.0)
    p.add_argument("--q0", type=float, default=1.0)
    p.add_argument("--max-iters", type=int, default=1000)

    p = add("criticality", cmd_criticality, "stability verdicts on a (sigma_w, sigma_b) grid (CSV by default)")
    p.add_argument("--activation", required=True)
    p.add_argument("--sigma-w", type=_range, required=True, help="start:end:count")
    p.add_argument("--sigma-b", type=_range, required=True, help="start:end:count")
    p.add_argument("--q0", type=float, default=1.0)
    p.add_argument("--max-iters", type=int, default=1000)

    p = add("lyapunov", cmd_lyapunov, "contraction certificate and Lyapunov descent check for T(x)=phi(ax+b)")
    p.add_argument("--activation", required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, default=0.0)
    p.add_argument("--sigma-ref", type=_positive, default=1.0)
    p.add_argument("--probes", type=lambda t: tuple(float(v) for v in t.split(":")), default=(-5.0, 5.0, 64.0),
                   help="lo:hi:count Chebyshev probes (default -5:5:64)")
    p.add_argument("--c", type=float, default=None, help="override the descent constant")
    p.add_argument("--f-lambda", type=float, default=None, help="also run the F-based check with this lambda")
    p.add_argument("--f-flipped", action="store_true", help="use V = lambda x^2/2 - F(a x) in the F-based check")

    p = add("kernel-bound", cmd_kernel, "randomized stress of the kernel mixed-Hessian bound")
    p.add_argument("--activation", required=True)
    p.add_argument("--dim", type=int, default=8)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--samples", type=int, default=200000)

    p = add("bias-drift", cmd_bias_drift, "bias drift bound via asymptotes and C(phi)")
    p.add_argument("--activation", **acts)
    p.add_argument("--sigma", **sigmas)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for key, default in (("order", DEFAULT_ORDER), ("format", None), ("out", None), ("seed", 0)):
        if not hasattr(args, key):
            setattr(args, key, default)
    try:
        check_seed(args.seed)
        build_rule(args.order)
        return args.func(args)
    except PropertyFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PROPERTY
    except (ArgumentError, DomainError, CapabilityError, MetadataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGUMENT
    except ActsigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
