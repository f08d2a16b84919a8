"""Command-line front end: capacity queries, sweeps, thresholds, condition checks, degradation."""

import argparse
import sys

import numpy as np

from .capacity import (
    DEFAULT_TOL,
    capacity_causal,
    capacity_full_csi,
    capacity_gp,
    capacity_no_csi,
    capacity_no_decoder_csi,
    capacity_probing,
)
from .channels import SpecError, load_spec
from .degradation import erasure_degradation_witness, stochastic_degradation_lp
from .strategies import EnumerationCapExceeded
from .sweeps import FIGURES, NonConvergence, SweepError, SweepSpec, figure_spec, run_sweep
from .thresholds import prop1_check, prop2_check, prop3_check, theorem_checks, threshold_report

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_NONCONVERGENCE = 3
EXIT_ASSERT = 4

LOG2 = np.log(2.0)


def _emit(text, out=None):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _rows_block(rows):
    return "rows:\n" + "".join(",".join(str(c) for c in r) + "\n" for r in rows)


# --- capacity ----------------------------------------------------------------

def cmd_capacity(args):
    model, side = load_spec(args.spec)
    entries = [
        ("C_lower", capacity_no_csi(model, args.tol)),
        ("C_upper", capacity_full_csi(model, args.tol)),
    ]
    gp = None
    if side is not None:
        causal = capacity_causal(model, side, args.tol)
        probing = capacity_probing(model, side, args.tol)
        low, tilde = capacity_no_decoder_csi(model, side, args.tol)
        entries += [("C_causal", causal), ("C_probing", probing),
                    ("C_tilde_lower", low), ("C_tilde", tilde)]
        if args.gp:
            gp = capacity_gp(model, side, restarts=args.restarts, seed=args.seed, tol=args.tol,
                             causal=causal, probing=probing)
    unit = "bits" if args.bits else "nats"
    scale = 1 / LOG2 if args.bits else 1.0
    lines = [f"model: {model.name or '(unnamed)'}  |X|={model.x_size} |Y|={model.y_size} "
             f"|S|={model.s_size}  side: {'none' if side is None else side.kind or 'matrix'}",
             f"{'quantity':<14}{'value (' + unit + ')':>20}{'gap bound':>14}{'iters':>9}  converged"]
    rows = []
    for name, sol in entries:
        lines.append(f"{name:<14}{sol.value * scale:>20.12g}{sol.gap_bound * scale:>14.3g}"
                     f"{sol.iterations:>9}  {sol.converged}")
        rows.append((name, f"{sol.value * scale:.12g}", unit, sol.iterations, sol.converged))
    if gp is not None:
        lines.append(f"{'C_gp_lb':<14}{gp.lower_bound * scale:>20.12g}   best of {gp.restarts} restarts")
        lines.append(f"{'C_gp_ub':<14}{gp.upper_bound * scale:>20.12g}")
        rows.append(("C_gp_lb", f"{gp.lower_bound * scale:.12g}", unit, gp.restarts, True))
        rows.append(("C_gp_ub", f"{gp.upper_bound * scale:.12g}", unit, gp.restarts, True))
    _emit("\n".join(lines) + "\n\n" + _rows_block(rows), args.out)
    if not all(sol.converged for _, sol in entries):
        print("error: a solver hit its iteration limit before meeting --tol", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    return EXIT_OK


# --- sweep -------------------------------------------------------------------

def cmd_sweep(args):
    if args.figure == "custom":
        if not args.spec:
            raise SpecError("custom sweeps need --spec")
        model, _ = load_spec(args.spec)
        start, stop = args.range
        spec = SweepSpec(model, args.family, np.linspace(start, stop, args.grid or 101),
                         gp=args.gp, tilde=args.tilde, restarts=args.restarts)
    else:
        spec = figure_spec(args.figure, args.grid, args.restarts)
    result = run_sweep(spec, tol=args.tol, seed=args.seed, workers=args.workers)
    _emit(result.to_csv(), args.out)
    if result.unconverged:
        raise NonConvergence(
            "no convergence at " + ", ".join(f"{result.param}={v:g}" for v in result.unconverged))
    return EXIT_OK


# --- thresholds and checks ---------------------------------------------------

def _verdict_lines(conditions):
    lines = [f"{'condition':<10}{'holds':>7}{'lhs':>18}{'rhs':>18}  note"]
    rows = []
    for name, v in conditions.items():
        lines.append(f"{name:<10}{str(v.holds):>7}{v.lhs:>18.10g}{v.rhs:>18.10g}  {v.note}")
        rows.append((name, v.holds, f"{v.lhs:.12g}", f"{v.rhs:.12g}"))
    return lines, rows


def _assert_exit(conditions, requested):
    if requested is None:
        return EXIT_OK
    names = list(conditions) if requested == "all" else requested.split(",")
    unknown = [n for n in names if n not in conditions]
    if unknown:
        raise SpecError(f"--assert: unknown condition(s) {', '.join(unknown)}")
    failed = [n for n in names if not conditions[n].holds]
    if failed:
        print("assertion failed: " + ", ".join(failed), file=sys.stderr)
        return EXIT_ASSERT
    return EXIT_OK


def cmd_thresholds(args):
    model, side = load_spec(args.spec)
    rep = threshold_report(model, side, tol=min(args.tol, 1e-10))
    lines = [f"model: {model.name or '(unnamed)'}",
             f"{'threshold':<20}{'value':>20}"]
    rows = []
    for name, value in rep.rows():
        lines.append(f"{name:<20}{value:>20.12g}")
        rows.append((name, f"{value:.12g}"))
    if not rep.overline_exact:
        lines.append("note: overline thresholds use a single perfect-CSI maximizer (lower bounds)")
    vlines, vrows = _verdict_lines(rep.conditions)
    _emit("\n".join(lines + [""] + vlines) + "\n\n" + _rows_block(rows + vrows), args.out)
    return _assert_exit(rep.conditions, args.assert_)


def cmd_check(args):
    model, side = load_spec(args.spec)
    conditions = {}
    if side is not None:
        conditions.update(theorem_checks(model, side))
    from .thresholds import STRICT_MARGIN, Verdict

    p1 = prop1_check(model)
    conditions["Prop1"] = Verdict(p1.holds, p1.worst, STRICT_MARGIN)
    p2 = prop2_check(model)
    conditions["Prop2"] = Verdict(p2, float(p2), 1.0)
    p3 = prop3_check(model)
    conditions["Prop3"] = Verdict(p3.holds, p3.worst, STRICT_MARGIN)
    vlines, vrows = _verdict_lines(conditions)
    _emit("\n".join(vlines) + "\n\n" + _rows_block(vrows), args.out)
    return _assert_exit(conditions, args.assert_)


# --- degrade -----------------------------------------------------------------

def cmd_degrade(args):
    _, target = load_spec(args.target)
    _, source = load_spec(args.source)
    if target is None or source is None:
        raise SpecError("both spec files need a side_channel")
    if source.is_erasure and not np.isnan(source.param):
        verdict = erasure_degradation_witness(target, source.param)
        method = "erasure margin"
    else:
        verdict = stochastic_degradation_lp(target, source)
        method = "LP feasibility"
    lines = [f"degraded: {verdict.degraded}  ({method})",
             f"residual: {verdict.residual:.3g}"]
    if verdict.indeterminate:
        lines.append("note: the witness does not reproduce the target to tolerance")
    if verdict.witness is not None:
        lines.append("witness (rows: source outputs, columns: target outputs):")
        lines += ["  " + " ".join(f"{v:.10f}" for v in row) for row in verdict.witness]
    rows = [("degraded", verdict.degraded), ("residual", f"{verdict.residual:.12g}")]
    _emit("\n".join(lines) + "\n\n" + _rows_block(rows), args.out)
    if args.assert_ is not None and not verdict.degraded:
        print("assertion failed: not degraded", file=sys.stderr)
        return EXIT_ASSERT
    return EXIT_OK


# --- parser ------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_PARSE)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="solver gap tolerance (nats)")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized restarts")
    common.add_argument("--bits", action="store_true", help="report capacities in bits")
    common.add_argument("--out", help="write the output to this file instead of stdout")
    common.add_argument("--assert", dest="assert_", nargs="?", const="all", default=None,
                        metavar="NAMES",
                        help="exit with status 4 if any (or the listed, comma-separated) verdict is false")

    parser = _Parser(prog="statecap", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("capacity", parents=[common], help="all applicable capacities of a spec")
    p.add_argument("spec")
    p.add_argument("--gp", action="store_true", help="also bracket the noncausal capacity")
    p.add_argument("--restarts", type=int, default=32)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("sweep", parents=[common], help="CSV sweep over the side-channel noise level")
    p.add_argument("figure", choices=FIGURES + ("custom",))
    p.add_argument("--grid", type=int, default=None, help="number of grid points")
    p.add_argument("--spec", help="channel spec for custom sweeps")
    p.add_argument("--family", choices=("erasure", "symmetric"), default="erasure")
    p.add_argument("--range", type=float, nargs=2, default=(0.0, 1.0), metavar=("START", "STOP"))
    p.add_argument("--gp", action="store_true")
    p.add_argument("--tilde", action="store_true", help="add the no-decoder-state columns")
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("thresholds", parents=[common], help="noise thresholds and conditions")
    p.add_argument("spec")
    p.set_defaults(func=cmd_thresholds)

    p = sub.add_parser("check", parents=[common], help="sufficient conditions and counterexample tests")
    p.add_argument("spec")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("degrade", parents=[common], help="is TARGET's side channel a degraded SOURCE?")
    p.add_argument("target")
    p.add_argument("source")
    p.set_defaults(func=cmd_degrade)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SpecError, OSError, EnumerationCapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (NonConvergence, SweepError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
