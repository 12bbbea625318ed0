"""Command-line interface.

Exit codes: 0 success, 2 usage error (including out-of-range parameters),
3 numerical failure, 4 acceptance failure.
"""

import argparse
import contextlib
import io
import json
import math
import sys

from . import __version__, acceptance, bell, closed_form, npa, qubit, scan, tilting
from ._validation import BellError, EfficiencyError, LevelError, TiltRangeError

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_ACCEPTANCE = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _json_default(o):
    if hasattr(o, "tolist"):
        return o.tolist()
    raise TypeError(f"not serialisable: {type(o).__name__}")


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


def _emit_json(doc, out):
    json.dump(_clean(doc), out, indent=2, default=_json_default)
    out.write("\n")


def _emit_text(doc, out):
    for k, v in doc.items():
        out.write(f"{k}: {v}\n")


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _floats(text, n=None):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise UsageError(f"expected {n} numbers, got {text!r}")
    return vals


def _resolve_point(args):
    """``(alpha, beta, etaA, etaB)`` from either flag pair; efficiencies may be None."""
    tilts = args.alpha is not None or args.beta is not None
    etas = args.etaA is not None or args.etaB is not None
    if tilts == etas:
        raise UsageError("give exactly one of --alpha/--beta or --etaA/--etaB")
    if etas:
        if args.etaA is None or args.etaB is None:
            raise UsageError("--etaA and --etaB must be given together")
        alpha, beta = tilting.tilts_from_efficiencies(args.etaA, args.etaB)
        return alpha, beta, args.etaA, args.etaB
    alpha = 0.0 if args.alpha is None else args.alpha
    beta = 0.0 if args.beta is None else args.beta
    closed_form.check_tilts(alpha, beta)
    etaA, etaB = tilting.efficiencies_from_tilts(alpha, beta)
    return alpha, beta, etaA, etaB


def _point_summary(alpha, beta, etaA, etaB):
    cq = closed_form.quantum_value(alpha, beta)
    inside = alpha + beta < 2.0
    doc = {
        "schemaVersion": bell.SCHEMA_VERSION,
        "alpha": alpha,
        "beta": beta,
        "etaA": etaA,
        "etaB": etaB,
        "localBound": 2.0 + alpha + beta,
        "cQ": cq,
        "cA": None,
        "cB": None,
        "schmidt": None,
        "loopholeFreeCHSH": tilting.effective_chsh_value(cq, tilting.ALL_PLUS, etaA, etaB),
        "inViolationRegion": inside,
    }
    if inside:
        s = qubit.optimal_state(alpha, beta)
        doc.update(cA=s.cA, cB=s.cB, schmidt=s.schmidt)
    return doc


def cmd_report(args, out):
    alpha, beta, etaA, etaB = _resolve_point(args)
    doc = _point_summary(alpha, beta, etaA, etaB)
    doc["isoEffectiveCHSH"] = scan.iso_effective_chsh(etaA, etaB)
    doc["criticalEtaB"] = tilting.critical_efficiency_bob(etaA) if etaA > 0.5 else None
    _emit_json(doc, out)


def cmd_qvalue(args, out):
    doc = _point_summary(*_resolve_point(args))
    keys = ("schemaVersion", "alpha", "beta", "cQ", "cA", "cB", "schmidt", "localBound", "loopholeFreeCHSH")
    doc = {k: doc[k] for k in keys}
    (_emit_json if args.json else _emit_text)(doc, out)


def cmd_strategy(args, out):
    alpha, beta, _, _ = _resolve_point(args)
    _emit_json(qubit.optimal_state(alpha, beta).to_dict(), out)


def _bits(text):
    if len(text) != 4 or set(text) - {"0", "1"}:
        raise UsageError(f"--bits takes four binary digits sA sB rA rB, got {text!r}")
    return tuple(int(c) for c in text)


def cmd_tilt(args, out):
    f = tilting.assignment_tilted_chsh(*_bits(args.bits), args.etaA, args.etaB)
    _emit_json(f.to_dict(), out)


def cmd_assignments(args, out):
    forms = {}
    rows = []
    for a in tilting.enumerate_assignments():
        f = tilting.assignment_tilted_chsh(*a.bits, args.etaA, args.etaB)
        _, A, B, _ = f.correlator_form()
        key = tilting.canonical_form(f)
        forms.setdefault(key, len(forms))
        rows.append(
            {
                "bits": "".join(map(str, a.bits)),
                "parity": a.parity,
                "A0": A[0], "A1": A[1], "B0": B[0], "B1": B[1],
                "bound": f.bound,
                "vertexBound": f.vertex_bound,
                "canonicalClass": forms[key],
            }
        )
    if args.csv:
        scan.write_csv(rows, list(rows[0]), out)
    else:
        _emit_json({"schemaVersion": bell.SCHEMA_VERSION, "etaA": args.etaA, "etaB": args.etaB,
                    "assignments": rows}, out)


def cmd_npa(args, out):
    if args.alpha is None and args.beta is None:
        raise UsageError("--alpha and/or --beta are required")
    alpha = args.alpha or 0.0
    beta = args.beta or 0.0
    level = npa.parse_level(args.level)
    res = npa.npa_solve(alpha, beta, level, args.tol)
    cq = closed_form.quantum_value(alpha, beta)
    doc = {
        "schemaVersion": bell.SCHEMA_VERSION,
        "alpha": alpha,
        "beta": beta,
        "level": level,
        "size": len(npa.build_words(level, allow_large=True)),
        "upperBound": res.upper_bound,
        "cQ": cq,
        "gap": res.upper_bound - cq,
        "status": res.status,
        "iterations": res.iterations,
        "dualityGap": res.duality_gap,
    }
    (_emit_text if args.text else _emit_json)(doc, out)
    if res.status != "optimal" and args.strict:
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_npa_map(args, out):
    a_lo, a_hi = _floats(args.alpha_range, 2)
    b_lo, b_hi = _floats(args.beta_range, 2)
    if args.grid < 2:
        raise UsageError("--grid must be at least 2")
    cols = ["alpha", "beta", "minTightLevel", "status"]
    rows = []
    for a in _linspace(a_lo, a_hi, args.grid):
        for b in _linspace(b_lo, b_hi, args.grid):
            row = {"alpha": a, "beta": b}
            if a + b >= 2.0:
                row.update(minTightLevel=None, status="out-of-region")
            else:
                try:
                    lvl = npa.min_tight_level(a, b, args.gap_tol, args.max_level, args.tol)
                    row.update(minTightLevel=lvl or "not-found", status="ok")
                except BellError as exc:
                    row.update(minTightLevel=None, status=f"error: {exc}")
            rows.append(row)
    scan.write_csv(rows, cols, out)


def _linspace(lo, hi, n):
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def cmd_scan(args, out):
    outputs = tuple(o.strip() for o in args.outputs.split(",") if o.strip())
    y_values = None
    if args.y_values:
        y_values = tuple("x" if v.strip() == "x" else float(v) for v in args.y_values.split(","))
    default = (0.5, 1.0) if args.plane == "eta" else (0.0, 1.0)
    spec = scan.ScanSpec(
        plane=args.plane,
        x_range=tuple(_floats(args.x_range, 2)) if args.x_range else default,
        y_range=tuple(_floats(args.y_range, 2)) if args.y_range else default,
        steps=(args.grid, args.grid),
        outputs=outputs,
        y_values=y_values,
        max_level=args.max_level,
        gap_tol=args.gap_tol,
    )
    scan.write_csv(scan.run_scan(spec), spec.columns, out)


def cmd_verify(args, out):
    only = {int(v) for v in args.only.split(",")} if args.only else None
    settings = acceptance.Settings(sdp_tol=args.tol, check_runtime=not args.no_timing)
    results = []
    for check in acceptance.CRITERIA:
        if only and check.number not in only:
            continue
        r = check(settings)
        results.append(r)
        out.write(r.line() + "\n")
        out.flush()
    passed = sum(r.passed for r in results)
    out.write(f"{passed}/{len(results)} criteria passed\n")
    return EXIT_OK if passed == len(results) else EXIT_ACCEPTANCE


def _add_point_flags(p):
    g = p.add_argument_group("parameter point (give one pair)")
    g.add_argument("--alpha", type=float, default=None, help="tilt on <A_0> (default: none)")
    g.add_argument("--beta", type=float, default=None, help="tilt on <B_0> (default: none)")
    g.add_argument("--etaA", type=float, default=None, help="Alice's detector efficiency (default: none)")
    g.add_argument("--etaB", type=float, default=None, help="Bob's detector efficiency (default: none)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tiltedchsh",
        description="Tilted CHSH functionals for inefficient detectors: exact values, strategies, NPA bounds.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        p.add_argument("--out", default="-", help="output file (default: stdout)")
        p.set_defaults(func=func)
        return p

    p = add("report", cmd_report, "full JSON summary for one efficiency or tilt pair")
    _add_point_flags(p)

    p = add("qvalue", cmd_qvalue, "exact quantum value and optimal cosines")
    _add_point_flags(p)
    p.add_argument("--json", action="store_true", help="emit JSON instead of key: value lines")

    p = add("strategy", cmd_strategy, "optimal two-qubit strategy as JSON")
    _add_point_flags(p)

    p = add("tilt", cmd_tilt, "tilted CHSH functional for one deterministic assignment")
    p.add_argument("--etaA", type=float, required=True, help="Alice's efficiency in (0, 1]")
    p.add_argument("--etaB", type=float, required=True, help="Bob's efficiency in (0, 1]")
    p.add_argument("--bits", default="0000", help="assignment bits sA sB rA rB (default: 0000)")

    p = add("assignments", cmd_assignments, "all 16 assignments with their tilted functionals")
    p.add_argument("--etaA", type=float, default=0.85, help="Alice's efficiency (default: 0.85)")
    p.add_argument("--etaB", type=float, default=0.85, help="Bob's efficiency (default: 0.85)")
    p.add_argument("--csv", action="store_true", help="emit CSV instead of JSON")
    p.add_argument("--json", action="store_true", help="emit JSON (the default)")

    p = add("npa", cmd_npa, "NPA upper bound at one level")
    p.add_argument("--alpha", type=float, default=None, help="tilt on <A_0> (default: 0)")
    p.add_argument("--beta", type=float, default=None, help="tilt on <B_0> (default: 0)")
    p.add_argument("--level", default="1+AB", help="1, 1+AB, 2, 3, ... (default: 1+AB)")
    p.add_argument("--tol", type=float, default=npa.DEFAULT_TOL, help=f"solver tolerance (default: {npa.DEFAULT_TOL:g})")
    p.add_argument("--text", action="store_true", help="key: value lines instead of JSON")
    p.add_argument("--json", action="store_true", help="emit JSON (the default)")
    p.add_argument("--strict", action="store_true", help="exit 3 unless the solver reports optimal")

    p = add("npa-map", cmd_npa_map, "CSV map of the minimum tight NPA level over a tilt grid")
    p.add_argument("--grid", type=int, default=6, help="points per axis (default: 6)")
    p.add_argument("--alpha-range", default="0,0.95", help="alpha range lo,hi (default: 0,0.95)")
    p.add_argument("--beta-range", default="0,0.95", help="beta range lo,hi (default: 0,0.95)")
    p.add_argument("--max-level", default="3", help="highest level tried (default: 3)")
    p.add_argument("--gap-tol", type=float, default=1e-6, help="tightness tolerance (default: 1e-6)")
    p.add_argument("--tol", type=float, default=npa.DEFAULT_TOL, help=f"solver tolerance (default: {npa.DEFAULT_TOL:g})")
    p.add_argument("--csv", action="store_true", help="emit CSV (the only format)")

    p = add("scan", cmd_scan, "CSV grid scan over efficiencies or tilts")
    p.add_argument("--plane", choices=("eta", "alpha"), default="eta", help="parameter plane (default: eta)")
    p.add_argument("--grid", type=int, default=11, help="points per axis (default: 11)")
    p.add_argument("--x-range", default=None, help="lo,hi of etaA or alpha (default: 0.5,1 or 0,1)")
    p.add_argument("--y-range", default=None, help="lo,hi of etaB or beta (default: 0.5,1 or 0,1)")
    p.add_argument("--y-values", default=None, help="explicit y list; 'x' means y = x, e.g. x,0.1,0.01,0")
    p.add_argument(
        "--outputs",
        default="cQ,loopholeFreeCHSH",
        help=f"comma list from {','.join(scan.OUTPUTS)} (default: cQ,loopholeFreeCHSH)",
    )
    p.add_argument("--max-level", default="3", help="highest NPA level for npaLevel (default: 3)")
    p.add_argument("--gap-tol", type=float, default=1e-6, help="NPA tightness tolerance (default: 1e-6)")
    p.add_argument("--csv", action="store_true", help="emit CSV (the only format)")

    p = add("verify", cmd_verify, "run the acceptance checks and print a pass/fail table")
    p.add_argument("--only", default=None, help="comma list of criterion numbers (default: all)")
    p.add_argument("--tol", type=float, default=npa.DEFAULT_TOL, help=f"SDP tolerance (default: {npa.DEFAULT_TOL:g})")
    p.add_argument("--no-timing", action="store_true", help="ignore runtime budgets")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with _output(args.out) as out:
            code = args.func(args, out)
    except (UsageError, EfficiencyError, TiltRangeError, LevelError) as exc:
        print(f"tiltedchsh {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BellError, ArithmeticError, ValueError) as exc:
        print(f"tiltedchsh {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return code or EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
