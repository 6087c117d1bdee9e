"""Command line front end: ``sixvertex <subcommand> ...``.

Every rational is given as ``num/den`` (or an integer).  Weights are
integers (finite modules), ``v:J`` for a Verma module or ``g:y`` for a
generic weight with ``y = q^{J/2}``.  Reports are JSON with sorted keys, so
identical arguments give identical bytes (use ``--no-timing`` to drop the
wall-clock fields).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import funcrel, rmatrix, tetra
from .qops import q_operator
from .scalars import Context
from .transfer import TransferSpec, transfer_block
from .weights import Weight

THREADS_ENV = "SIXVERTEX_THREADS"


def rational(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc
    if "." in text or "e" in text.lower():
        raise argparse.ArgumentTypeError(f"use num/den, not a decimal: {text!r}")
    return value


def weight(text: str) -> Weight:
    try:
        if text.startswith("v:"):
            return Weight.verma(int(text[2:]))
        if text.startswith("g:"):
            return Weight.generic(rational(text[2:]))
        return Weight.finite(int(text))
    except (ValueError, argparse.ArgumentTypeError) as exc:
        raise argparse.ArgumentTypeError(f"bad weight {text!r}: {exc}") from exc


def _context(args) -> Context:
    return Context(args.p, lam=args.lam, phi=args.phi)


def _emit(payload, path: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path and path != "-":
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_csv(header, rows, path: str | None) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    if path and path != "-":
        with open(path, "w") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def _residual(values) -> dict:
    worst = max(values, default=Fraction(0))
    return {"residual_kind": "ExactZero" if worst == 0 else "NonZero", "max_abs": str(worst)}


# -- subcommands ------------------------------------------------------------


def cmd_compute_r(args) -> int:
    ctx = _context(args)
    A, B = args.I, args.J
    if not (A.is_finite and B.is_finite) and args.limit is None:
        raise SystemExit("infinite-dimensional weights need --limit")
    rows = []
    for i in A.indices(args.limit):
        for j in B.indices(args.limit):
            for ip in A.indices(args.limit):
                for jp in B.indices(args.limit):
                    v = rmatrix.r_entry(i, j, ip, jp, A, B, ctx, args.route) if i + j == ip + jp else Fraction(0)
                    rows.append((i, j, ip, jp, v.numerator, v.denominator))
    _write_csv(("i", "j", "i_out", "j_out", "numerator", "denominator"), rows, args.out)
    return 0


def cmd_verify_ybe(args) -> int:
    ctx = _context(args)
    rep = rmatrix.verify_ybe(args.I1, args.I2, args.I3, args.lam1, args.lam2, ctx, args.max_total, args.route)
    payload = {
        "name": "ybe",
        "params": {**ctx.describe(), "weights": list(rep.weights), "lambda1": str(args.lam1),
                   "lambda2": str(args.lam2), "route": args.route},
        "sectors": {str(k): str(v) for k, v in rep.residuals.items()},
        **_residual(rep.residuals.values()),
    }
    _emit(payload, args.json)
    return 0 if rep.exact_zero else 1


def cmd_verify_tetra(args) -> int:
    fields = tetra.DressingFields.random(random.Random(args.seed)) if args.dressed else None
    tuples = tetra.random_nontrivial_tuples(args.random, args.max_index, args.seed, args.q) if args.random else None
    rep = tetra.verify_tetrahedron(args.q, args.max_index, fields=fields, tuples=tuples)
    payload = {
        "name": "tetrahedron",
        "params": {"q": str(args.q), "max_index": args.max_index, "random": args.random, "seed": args.seed,
                   "dressed": args.dressed},
        "cases": rep.cases,
        "nonzero_cases": rep.nonzero_cases,
        "failures": [[list(a), list(b), str(d)] for a, b, d in rep.failures],
        "residual_kind": "ExactZero" if rep.exact_zero else "NonZero",
    }
    _emit(payload, args.json)
    return 0 if rep.exact_zero else 1


def cmd_verify_symmetries(args) -> int:
    ctx = _context(args)
    rep = rmatrix.verify_symmetries(args.I, args.J, ctx, args.route)
    payload = {
        "name": "symmetries",
        "params": {**ctx.describe(), "I": args.I, "J": args.J, "route": args.route},
        "residuals": {k: str(v) for k, v in rep.residuals.items()},
        **_residual(rep.residuals.values()),
    }
    _emit(payload, args.json)
    return 0 if rep.exact_zero else 1


def cmd_verify_recurrences(args) -> int:
    ctx = Context(args.p)
    rep = rmatrix.recurrence_oracle(args.I, args.J, ctx, args.max_total)
    payload = {
        "name": "recurrences",
        "params": {**ctx.describe(), "I": args.I.label(), "J": args.J.label(), "max_total": args.max_total},
        "checked": {k: v for k, v in rep.checked.items()},
        "residuals": {k: str(v) for k, v in rep.residuals.items()},
        **_residual(rep.residuals.values()),
    }
    _emit(payload, args.json)
    return 0 if rep.exact_zero else 1


def _block_rows(block):
    label = lambda s: "-".join(map(str, s))
    for r, row in enumerate(block.basis):
        for c, col in enumerate(block.basis):
            v = block.matrix[r][c]
            yield label(row), label(col), v.numerator, v.denominator


def cmd_build_q(args) -> int:
    ctx = _context(args)
    sign = {"plus": "+", "minus": "-"}[args.sign]
    block = q_operator(sign, args.I, args.M, args.sector, ctx, strict=args.strict)
    _write_csv(("row", "col", "numerator", "denominator"), _block_rows(block), args.out)
    return 0


def cmd_build_transfer(args) -> int:
    ctx = _context(args)
    spec = TransferSpec(args.J, args.I, args.M, args.kind)
    block = transfer_block(spec, args.sector, ctx, strict=args.strict)
    _write_csv(("row", "col", "numerator", "denominator"), _block_rows(block), args.out)
    return 0


def _suite_job(job):
    suite, grid, p, lam, phi = job
    return funcrel.run_suite(suite, grid, Context(p, lam=lam, phi=phi))


def cmd_verify_funcrel(args) -> int:
    suites = funcrel.SUITES if args.suite == "all" else (args.suite,)
    jobs = [(s, args.grid, args.p, args.lam, args.phi) for s in suites]
    threads = args.threads if args.threads else int(os.environ.get(THREADS_ENV, "1"))
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_suite_job, jobs))
    else:
        results = [_suite_job(j) for j in jobs]
    records = []
    for reports in results:
        for r in reports:
            rec = r.as_json()
            if args.no_timing:
                rec["seconds"] = 0
            records.append(rec)
    records.sort(key=lambda rec: (rec["name"], json.dumps(rec["params"], sort_keys=True)))
    ok = all(rec["residual_kind"] in ("ExactZero", "DegenerateField") for rec in records)
    if args.json:
        _emit(records, args.json)
    for rec in records:
        print(f"{rec['residual_kind']:<15} {rec['name']:<14} {json.dumps(rec['params'], sort_keys=True)}", file=sys.stderr)
    return 0 if ok else 1


def cmd_bethe(args) -> int:
    ctx = _context(args)
    sectors = range(args.I * args.M + 1) if args.sector is None else [args.sector]
    threshold = float(args.threshold)
    out, ok = [], True
    for l in sectors:
        for sign in "+-":
            rs = funcrel.bethe_roots(args.I, args.M, l, ctx, sign, args.digits)
            worst = float(max((x for res in rs.residuals for x in res), default=0))
            passed = rs.counts_ok and worst < threshold
            ok &= passed
            out.append({
                "sector": l,
                "sign": sign,
                "roots": rs.roots,
                "rho": rs.rho,
                "expected_count": rs.expected_count,
                "max_residual": f"{worst:.3e}",
                "pass": passed,
            })
    _emit({"params": {**ctx.describe(), "I": args.I, "M": args.M, "digits": args.digits,
                      "threshold": args.threshold}, "sets": out}, args.json)
    return 0 if ok else 1


# -- parser -----------------------------------------------------------------


def _point(sp, lam=True, phi=True):
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--p", type=rational, default=Fraction(1, 2), help="p = q^(1/2) (default 1/2)")
    group.add_argument("--q", dest="q_value", type=rational, help="q itself; must be the square of a rational")
    if lam:
        sp.add_argument("--lambda", dest="lam", type=rational, default=Fraction(3, 5))
    if phi:
        sp.add_argument("--phi", type=rational, default=Fraction(5, 7))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sixvertex", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("compute-r", help="all entries of R_{I,J} as CSV")
    sp.add_argument("--I", type=weight, required=True)
    sp.add_argument("--J", type=weight, required=True)
    sp.add_argument("--route", choices=rmatrix.ROUTES, default="single")
    sp.add_argument("--limit", type=int, help="index cutoff for infinite-dimensional weights")
    sp.add_argument("--out", help="CSV path (default stdout)")
    _point(sp)
    sp.set_defaults(func=cmd_compute_r)

    sp = sub.add_parser("verify-ybe", help="Yang-Baxter equation, sector by sector")
    for name in ("--I1", "--I2", "--I3"):
        sp.add_argument(name, type=weight, required=True)
    sp.add_argument("--lam1", type=rational, default=Fraction(2, 3))
    sp.add_argument("--lam2", type=rational, default=Fraction(5, 4))
    sp.add_argument("--max-total", type=int)
    sp.add_argument("--route", choices=rmatrix.ROUTES[:3], default="single")
    sp.add_argument("--json")
    _point(sp, lam=False)
    sp.set_defaults(func=cmd_verify_ybe)

    sp = sub.add_parser("verify-tetra", help="tetrahedron equation for the 3D R-matrix")
    sp.add_argument("--q", type=rational, default=Fraction(1, 2))
    sp.add_argument("--max-index", type=int, default=1)
    sp.add_argument("--random", type=int, default=0, help="check this many random tuples instead of the full grid")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--dressed", action="store_true", help="use random dressing fields drawn from --seed")
    sp.add_argument("--json")
    sp.set_defaults(func=cmd_verify_tetra)

    sp = sub.add_parser("verify-symmetries", help="permutation, spin-flip, inversion and transposition")
    sp.add_argument("--I", type=int, required=True)
    sp.add_argument("--J", type=int, required=True)
    sp.add_argument("--route", choices=rmatrix.ROUTES[:3], default="single")
    sp.add_argument("--json")
    _point(sp)
    sp.set_defaults(func=cmd_verify_symmetries)

    sp = sub.add_parser("verify-recurrences", help="the three linear recurrences on admissible anchors")
    sp.add_argument("--I", type=weight, required=True)
    sp.add_argument("--J", type=weight, required=True)
    sp.add_argument("--max-total", type=int)
    sp.add_argument("--json")
    _point(sp, lam=False, phi=False)
    sp.set_defaults(func=cmd_verify_recurrences)

    sp = sub.add_parser("build-q", help="one sector block of A_+ or A_-")
    sp.add_argument("--sign", choices=("plus", "minus"), required=True)
    sp.add_argument("--I", type=weight, required=True)
    sp.add_argument("--M", type=int, required=True)
    sp.add_argument("--sector", type=int, required=True)
    sp.add_argument("--strict", action="store_true", help="refuse analytic continuation of the trace")
    sp.add_argument("--out")
    _point(sp)
    sp.set_defaults(func=cmd_build_q)

    sp = sub.add_parser("build-transfer", help="one sector block of a transfer matrix")
    sp.add_argument("--kind", choices=("hat", "finite"), default="hat")
    sp.add_argument("--J", type=weight, required=True)
    sp.add_argument("--I", type=int, required=True)
    sp.add_argument("--M", type=int, required=True)
    sp.add_argument("--sector", type=int, required=True)
    sp.add_argument("--strict", action="store_true")
    sp.add_argument("--out")
    _point(sp)
    sp.set_defaults(func=cmd_build_transfer)

    sp = sub.add_parser("verify-funcrel", help="functional relations as exact operator identities")
    sp.add_argument("--suite", choices=funcrel.SUITES + ("all",), default="all")
    sp.add_argument("--grid", choices=("small", "full"), default="small")
    sp.add_argument("--threads", type=int, help=f"worker processes (default ${THREADS_ENV} or 1)")
    sp.add_argument("--no-timing", action="store_true", help="write seconds=0 for byte-stable reports")
    sp.add_argument("--json")
    _point(sp)
    sp.set_defaults(func=cmd_verify_funcrel)

    sp = sub.add_parser("bethe", help="numeric Bethe roots and residuals")
    sp.add_argument("--I", type=int, default=1)
    sp.add_argument("--M", type=int, default=2)
    sp.add_argument("--sector", type=int)
    sp.add_argument("--digits", type=int, default=40)
    sp.add_argument("--threshold", default="1e-20")
    sp.add_argument("--json")
    _point(sp, lam=False)
    sp.set_defaults(func=cmd_bethe, phi=Fraction(9, 10))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "lam"):
        args.lam = Fraction(1)
    if not hasattr(args, "phi"):
        args.phi = Fraction(1)
    try:
        if getattr(args, "q_value", None) is not None:
            args.p = Context.from_q(args.q_value).p
        return args.func(args)
    except (ArithmeticError, ValueError) as exc:
        print(f"error in {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
