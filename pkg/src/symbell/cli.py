"""Command-line interface.

Data records go to ``--out`` (or stdout) as JSON lines or CSV. A run manifest
(command, parameters, version, timestamp, sha256 of the data) goes to
``<out>.manifest.json``, or to stderr when writing to stdout.

Exit codes: 0 success (including "no violation"), 1 usage error,
2 precondition violation, 3 internal consistency failure.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import math
import sys
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .core import SCHEMA, BellInequality, ConsistencyError, PreconditionError, SymbellError
from .inequalities import (
    BRUTEFORCE_MAX_N,
    ClassBParams,
    class_b_report,
    classical_bound,
    classical_bound_bruteforce,
    classify_facets_as_class_b,
    dicke_build,
    dicke_saturating_counts,
    elementary_inequality,
)
from .polytope import BRUTEFORCE_MAX_N as HULL_ORACLE_MAX_N
from .polytope import enumerate_boundary_counts, facets, facets_bruteforce, is_tight, phi
from .quantum import (
    LMGParams,
    MeasurementSettings,
    bell_operator_sym,
    collective_moments,
    collective_to_pairwise,
    dicke_reduced_two_qubit,
    dicke_violation_analytic,
    lmg_ground_state,
    lmg_ground_state_full,
    min_eigenvalue,
    optimize_theta,
    reduced_bell_operator,
    theta_scan,
)

# Published facet totals and class-B counts, used as reference fixtures.
REFERENCE_FACET_COUNTS = {5: (152, 16), 10: (2018, 272), 15: (7744, 1208), 20: (21274, 3592)}
LARGEST_REFERENCE_N = 20

EXIT_OK, EXIT_USAGE, EXIT_PRECONDITION, EXIT_CONSISTENCY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits 2 by default
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return v


def _int_list(text: str) -> list[int]:
    try:
        out = [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


# --- output ---------------------------------------------------------------


class Result:
    """Records plus the CSV column order and an optional exit status."""

    def __init__(self, records: list[dict], columns: Sequence[str] | None = None,
                 summary: dict | None = None, status: int = EXIT_OK, message: str = ""):
        self.records = records
        self.columns = list(columns) if columns else None
        self.summary = summary
        self.status = status
        self.message = message


def _flatten(value: Any) -> Any:
    if isinstance(value, (list, tuple, dict)):
        return json.dumps(value, separators=(",", ":"))
    return value


def render(result: Result, fmt: str) -> str:
    if fmt == "json":
        lines = [json.dumps({"schema": SCHEMA, **r}) for r in result.records]
        if result.summary is not None:
            lines.append(json.dumps({"schema": SCHEMA, "summary": result.summary}))
        return "".join(line + "\n" for line in lines)
    buf = io.StringIO()
    columns = result.columns or (list(result.records[0]) if result.records else [])
    writer = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for r in result.records:
        writer.writerow({k: _flatten(r.get(k)) for k in columns})
    return buf.getvalue()


def _manifest(command: str, params: dict, payload: str, summary: dict | None) -> dict:
    out = {
        "schema": SCHEMA,
        "command": command,
        "parameters": params,
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "sha256": hashlib.sha256(payload.encode()).hexdigest(),
    }
    if summary is not None:
        out["summary"] = summary
    return out


# --- shared argument groups -----------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("output")
    g.add_argument("--format", choices=("json", "csv"), default="json")
    g.add_argument("--out", metavar="PATH", help="write data here (manifest goes to PATH.manifest.json)")
    g.add_argument("--threads", type=_positive_int, default=1, help="worker threads for theta scans")
    g.add_argument("--seed", type=int, default=None, help="reserved; no randomized algorithms use it")


def _coefficient_args(p: argparse.ArgumentParser, families: Sequence[str], *, n_required: bool = True) -> None:
    p.add_argument("--family", choices=families, help="use a named inequality family instead of coefficients")
    for name in ("alpha", "beta", "gamma", "delta", "epsilon"):
        p.add_argument(f"--{name}", default=None, help="exact integer or p/q")
    p.add_argument("--n", type=_positive_int, required=n_required)


def _inequality_from(args, *, with_bound: bool = True) -> BellInequality:
    coeffs = [getattr(args, k) for k in ("alpha", "beta", "gamma", "delta", "epsilon")]
    if args.family:
        if any(c is not None for c in coeffs):
            raise UsageError("--family and explicit coefficients are mutually exclusive")
        if args.family == "elementary":
            return elementary_inequality(args.n)
        return dicke_build(args.n)
    if all(c is None for c in coeffs):
        raise UsageError("give --family or at least one coefficient flag")
    try:
        ineq = BellInequality(args.n, *(c if c is not None else 0 for c in coeffs), 0)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad coefficient: {exc}") from exc
    if with_bound:
        ineq = BellInequality(args.n, *ineq.coefficients, classical_bound(ineq).beta_c)
    return ineq


# --- commands -------------------------------------------------------------


def cmd_vertices(args) -> Result:
    if args.n < 2:
        raise PreconditionError(f"vertices needs n >= 2 (n=1 has no two-body correlators), got {args.n}")
    records = []
    for p in enumerate_boundary_counts(args.n):
        v = phi(p)
        records.append({"n": args.n, "a": p.a, "b": p.b, "c": p.c, "d": p.d, **v.to_dict()})
    return Result(records, ["n", "a", "b", "c", "d", "s0", "s1", "s00", "s01", "s11"])


def cmd_facets(args) -> Result:
    n = args.n
    if n > LARGEST_REFERENCE_N:
        print(f"warning: n={n} is beyond the reference range; no runtime guarantee and no reference comparison",
              file=sys.stderr)
    fl = facets(n)
    match = classify_facets_as_class_b(fl)
    summary: dict[str, Any] = {"n": n, "total": len(fl), "class_b": match.count,
                               "class_b_convention": match.convention}
    problems = []
    if n in REFERENCE_FACET_COUNTS:
        ref_total, ref_b = REFERENCE_FACET_COUNTS[n]
        ok = (len(fl), match.count) == (ref_total, ref_b)
        summary["reference"] = {"total": ref_total, "class_b": ref_b, "match": ok}
        if not ok:
            problems.append(f"counts ({len(fl)}, {match.count}) differ from reference ({ref_total}, {ref_b})")
    if args.check_bruteforce:
        if n > HULL_ORACLE_MAX_N:
            raise PreconditionError(f"--check-bruteforce supports n <= {HULL_ORACLE_MAX_N}, got n={n}")
        oracle = facets_bruteforce(n)
        same = set(oracle.facets) == set(fl.facets)
        summary["bruteforce_match"] = same
        if not same:
            problems.append(f"cddlib and brute-force hulls disagree ({len(fl)} vs {len(oracle)})")
    matched = {f for f, _ in match.matched}
    records = [{**f.to_dict(), "class_b": f in matched} for f in fl]
    cols = ["n", "alpha", "beta", "gamma", "delta", "epsilon", "beta_c", "class_b"]
    status = EXIT_CONSISTENCY if problems else EXIT_OK
    return Result(records, cols, summary, status, "; ".join(problems))


def cmd_bound(args) -> Result:
    ineq = _inequality_from(args, with_bound=False)
    report = classical_bound(ineq)
    rec: dict[str, Any] = {**ineq.to_dict(), **report.to_dict()}
    rec["minimizer_count"] = len(report.minimizers)
    status, message = EXIT_OK, ""
    if args.beta_c is not None:
        supplied = BellInequality(ineq.n, 0, 0, 0, 0, 0, args.beta_c).beta_c
        rec["supplied_beta_c"] = BellInequality(ineq.n, 0, 0, 0, 0, 0, supplied).to_dict()["beta_c"]
        rec["supplied_is_exact"] = supplied == report.beta_c
        rec["supplied_is_valid"] = supplied >= report.beta_c
    if args.bruteforce:
        if ineq.n > BRUTEFORCE_MAX_N:
            raise PreconditionError(f"--bruteforce supports n <= {BRUTEFORCE_MAX_N}, got n={ineq.n}")
        bf = classical_bound_bruteforce(*ineq.coefficients, ineq.n)
        rec["bruteforce_beta_c"] = BellInequality(ineq.n, 0, 0, 0, 0, 0, bf).to_dict()["beta_c"]
        if bf != report.beta_c:
            status, message = EXIT_CONSISTENCY, f"boundary bound {report.beta_c} != brute-force bound {bf}"
    cols = ["n", "alpha", "beta", "gamma", "delta", "epsilon", "beta_c", "minimizer_count", "bruteforce_beta_c"]
    return Result([rec], cols, status=status, message=message)


def _class_params(args) -> ClassBParams:
    if args.params_json:
        return ClassBParams.from_dict(json.loads(args.params_json))
    missing = [k for k in ("x", "y", "sigma", "mu", "branch") if getattr(args, k) is None]
    if missing:
        raise UsageError("missing class parameters: " + ", ".join("--" + m for m in missing))
    return ClassBParams(args.x, args.y, args.sigma, args.mu, args.branch)


def cmd_classbuild(args) -> Result:
    p = _class_params(args)
    built = class_b_report(p, args.n)
    rec = {
        **built.inequality.to_dict(),
        "params": p.to_dict(),
        "coprime": p.coprime,
        "closed_form_beta_c": built.analytic_bound,
        "exact_beta_c": built.exact_bound,
        "closed_form_attained": built.attained,
    }
    cols = ["n", "alpha", "beta", "gamma", "delta", "epsilon", "beta_c", "closed_form_beta_c", "closed_form_attained"]
    if not built.attained:
        return Result([rec], cols, status=EXIT_CONSISTENCY,
                      message=f"closed-form bound {built.analytic_bound} is not attained; exact bound is {built.exact_bound}")
    return Result([rec], cols)


def _state_for(args, ineq: BellInequality) -> int | None:
    choice = args.state or ("dicke" if args.family == "dicke" else "ground")
    if choice == "ground":
        return None
    return (ineq.n + 1) // 2 if args.k is None else args.k


def _figure(args, family: str) -> Result:
    rows = []
    n_list = args.n_list or ([10, 100, 1000] if family == "elementary" else list(range(2, 41)))
    sweep_n = args.sweep_n or ([10, 100, 1000] if family == "elementary" else [2, 4, 6, 10, 20])
    thetas = np.linspace(0.0, math.pi, args.theta_points)

    def build(n):
        return elementary_inequality(n) if family == "elementary" else dicke_build(n)

    def state(n):
        return None if family == "elementary" else (n + 1) // 2

    for n in n_list:
        if n < 2:
            raise PreconditionError(f"figure sweeps need n >= 2, got {n}")
        rep = optimize_theta(build(n), state=state(n), grid=args.grid, workers=args.threads)
        rows.append({"panel": "a", "n": n, "theta": rep.theta_star, "effective_violation": rep.effective_violation})
    for n in sweep_n:
        ineq = build(n)
        vals = theta_scan(ineq, thetas, state=state(n), workers=args.threads) / float(ineq.beta_c)
        rows.extend({"panel": "b", "n": n, "theta": float(t), "effective_violation": float(v)}
                    for t, v in zip(thetas, vals))
    return Result(rows, ["panel", "n", "theta", "effective_violation"])


def cmd_violate(args) -> Result:
    if args.figure:
        family = args.figure
        result = _figure(args, family)
        if args.plot:
            from .plotting import render_sweep

            render_sweep(result.records, args.plot, title=f"{family} effective violation")
        return result
    if args.n is None:
        raise UsageError("--n is required unless --figure is given")
    if args.n < 2:
        raise PreconditionError(f"Bell operators need n >= 2, got n={args.n}")
    ineq = _inequality_from(args)
    state = _state_for(args, ineq)
    if args.theta is not None:
        s = MeasurementSettings(args.theta)
        op = bell_operator_sym(ineq, s)
        lam = min_eigenvalue(op) if state is None else float(op.diagonal[state])
        bc = float(ineq.beta_c)
        rec = {"n": ineq.n, "theta_star": s.theta, "lambda_min": lam, "beta_c": bc,
               "effective_violation": lam / bc if bc else None,
               "objective": "ground" if state is None else f"dicke:{state}",
               "status": "violation" if lam < 0 else "no violation at these settings"}
    else:
        rec = optimize_theta(ineq, state=state, grid=args.grid, workers=args.threads).to_dict()
    rec["inequality"] = ineq.to_dict()
    cols = ["n", "theta_star", "lambda_min", "beta_c", "effective_violation", "objective", "status"]
    return Result([rec], cols)


def cmd_dicke(args) -> Result:
    n = args.n
    ineq = dicke_build(n)
    canon = ineq.canonical()
    tight = is_tight(canon)
    expected = set(dicke_saturating_counts(n))
    found = set(tight.saturating)
    viol = dicke_violation_analytic(n)
    rec = {
        "n": n,
        "inequality": ineq.to_dict(),
        "canonical": canon.to_dict(),
        "beta_c": ineq.beta_c,
        "bound_verified": classical_bound(ineq).beta_c == ineq.beta_c,
        "tight": tight.tight,
        "saturating": sorted(list(p.as_tuple()) for p in found),
        "saturating_match": found == expected,
        "theta_min": viol.theta_min,
        "value": viol.value,
        "effective": viol.effective,
        "reduced_state": dicke_reduced_two_qubit(n).tolist(),
    }
    ok = rec["bound_verified"] and rec["tight"] and rec["saturating_match"]
    cols = ["n", "beta_c", "bound_verified", "tight", "saturating_match", "theta_min", "value", "effective"]
    if not ok:
        return Result([rec], cols, status=EXIT_CONSISTENCY, message="Dicke-family check failed")
    return Result([rec], cols)


def cmd_lmg(args) -> Result:
    params = LMGParams(args.lam, args.h, args.n)
    gs = lmg_ground_state(params)
    rec = gs.to_dict()
    status, message = EXIT_OK, ""
    if args.full_check:
        energy, deg, _ = lmg_ground_state_full(params)
        rec["full_energy"] = energy
        rec["full_degeneracy"] = deg
        agree = abs(energy - gs.energy) <= 1e-9 * max(1.0, abs(energy)) and deg == gs.degeneracy
        rec["full_agrees"] = agree
        if not agree:
            status, message = EXIT_CONSISTENCY, "symmetric-sector ground state differs from full diagonalization"
    cols = ["n", "lambda", "h", "energy", "degeneracy", "dominant_k", "fidelity", "weak_field"]
    return Result([rec], cols, status=status, message=message)


def cmd_reduce(args) -> Result:
    n = args.n
    if args.sz2 is not None or args.szx is not None:
        if args.sz2 is None or args.szx is None:
            raise UsageError("--sz2 and --szx go together")
        pc = collective_to_pairwise(args.sz2, args.szx, n)
        rec = {"n": n, "czz": pc.czz, "czx": pc.czx, "attainable": pc.attainable,
               "czx_convention": "czx = 2 <{Sz, Sx}> / (n (n-1))"}
        return Result([rec], ["n", "czz", "czx", "attainable"])
    k = (n + 1) // 2 if args.k is None else args.k
    rho = dicke_reduced_two_qubit(n, k)
    ineq = dicke_build(n)
    theta = args.theta if args.theta is not None else dicke_violation_analytic(n).theta_min
    s = MeasurementSettings(theta)
    b_red = reduced_bell_operator(ineq, s)
    vec = np.zeros(n + 1)
    vec[k] = 1.0
    sz2, szx = collective_moments(vec)
    pc = collective_to_pairwise(sz2, szx, n)
    zz = np.kron(np.diag([1.0, -1.0]), np.diag([1.0, -1.0]))
    rec = {
        "n": n,
        "k": k,
        "theta": s.theta,
        "rho": rho.tolist(),
        "reduced_bell_operator": b_red.tolist(),
        "trace_value": float(np.trace(rho @ b_red)),
        "symmetric_value": float(bell_operator_sym(ineq, s).diagonal[k]),
        "czz_collective": pc.czz,
        "czz_reduced": float(np.trace(rho @ zz)),
        "czx_collective": pc.czx,
    }
    return Result([rec], ["n", "k", "theta", "trace_value", "symmetric_value", "czz_collective", "czz_reduced"])


COMMANDS: dict[str, Callable] = {
    "vertices": cmd_vertices,
    "facets": cmd_facets,
    "bound": cmd_bound,
    "classbuild": cmd_classbuild,
    "violate": cmd_violate,
    "dicke": cmd_dicke,
    "lmg": cmd_lmg,
    "reduce": cmd_reduce,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="symbell", description="Symmetric two-body Bell inequalities: polytope, bounds, violations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("vertices", help="vertices of the symmetric local polytope")
    p.add_argument("--n", type=_positive_int, required=True)
    _common(p)

    p = sub.add_parser("facets", help="complete facet list with class-B summary")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--check-bruteforce", action="store_true", help=f"compare with the brute-force hull (n <= {HULL_ORACLE_MAX_N})")
    _common(p)

    p = sub.add_parser("bound", help="exact classical bound and its minimizers")
    _coefficient_args(p, ("elementary", "dicke"))
    p.add_argument("--beta-c", default=None, help="user-supplied bound to check against the exact one")
    p.add_argument("--bruteforce", action="store_true", help=f"cross-check over all 4**n strategies (n <= {BRUTEFORCE_MAX_N})")
    _common(p)

    p = sub.add_parser("classbuild", help="member of the three-parameter class")
    for name in ("x", "y", "sigma", "mu", "branch"):
        p.add_argument(f"--{name}", type=int, default=None)
    p.add_argument("--params-json", default=None, help='{"x":..,"y":..,"sigma":..,"mu":..,"branch":..}')
    p.add_argument("--n", type=_positive_int, required=True)
    _common(p)

    p = sub.add_parser("violate", help="quantum violation search over theta, or figure sweeps")
    _coefficient_args(p, ("elementary", "dicke"), n_required=False)
    p.add_argument("--state", choices=("ground", "dicke"), default=None,
                   help="minimize the smallest eigenvalue (ground) or a Dicke-state expectation; default: dicke for the Dicke family")
    p.add_argument("--k", type=int, default=None, help="Dicke excitation for --state dicke (default ceil(n/2))")
    p.add_argument("--theta", type=float, default=None, help="evaluate at this angle instead of optimizing")
    p.add_argument("--grid", type=_positive_int, default=1024)
    p.add_argument("--figure", choices=("elementary", "dicke"), default=None,
                   help="sweep data for a family (rows: panel, n, theta, effective_violation); "
                        "panel a is the optimum against n, panel b the violation against theta")
    p.add_argument("--n-list", type=_int_list, default=None, help="n values for the n sweep (panel a)")
    p.add_argument("--sweep-n", type=_int_list, default=None, help="n values for the theta sweep (panel b)")
    p.add_argument("--theta-points", type=_positive_int, default=181)
    p.add_argument("--plot", metavar="PNG", default=None, help="also render the sweep with matplotlib")
    _common(p)

    p = sub.add_parser("dicke", help="Dicke-family inequality: bound, tightness, analytic violation")
    p.add_argument("--n", type=_positive_int, required=True)
    _common(p)

    p = sub.add_parser("lmg", help="LMG ground state in the symmetric sector")
    p.add_argument("--lam", "--lambda", dest="lam", type=float, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--full-check", action="store_true", help="compare with full 2**n diagonalization (n <= 10)")
    _common(p)

    p = sub.add_parser("reduce", help="two-qubit reduction of Dicke states and collective-moment conversion")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--sz2", type=float, default=None, help="<Sz^2> to convert to a zz correlator")
    p.add_argument("--szx", type=float, default=None, help="<{Sz, Sx}> to convert to a zx correlator")
    _common(p)
    return parser


def _params(args) -> dict:
    skip = {"command", "format", "out"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        result = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"symbell {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PreconditionError as exc:
        print(f"symbell {args.command}: precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except ConsistencyError as exc:
        print(f"symbell {args.command}: consistency failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except SymbellError as exc:
        print(f"symbell {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY

    payload = render(result, args.format)
    manifest = _manifest(args.command, _params(args), payload, result.summary)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload)
        with open(args.out + ".manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2)
            fh.write("\n")
    else:
        sys.stdout.write(payload)
        sys.stdout.flush()
        print(json.dumps({"manifest": manifest}), file=sys.stderr)
    if result.status != EXIT_OK:
        print(f"symbell {args.command}: consistency failure: {result.message}", file=sys.stderr)
    return result.status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
