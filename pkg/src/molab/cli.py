"""``molab`` command line.

Exit codes: 0 success, 1 when a check reports failure (an inconsistent or
failing MO verdict, a multiplicativity counterexample, violated axioms),
2 on usage or validation errors.  Outputs carry no timestamps, so identical
flags give byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Optional

import numpy as np

from . import catalog, mo, series, zeta
from .core import build_spf_sieve, iter_value_segments
from .errors import MolabError, NotFoundError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_function_flags(p: argparse.ArgumentParser, dest: str = "function", flag: str = "--function") -> None:
    p.add_argument(flag, dest=dest, required=True, choices=catalog.CATALOG_IDS, help="catalog function id")


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha-re", type=float, help="real part of alpha")
    p.add_argument("--alpha-im", type=float, default=0.0, help="imaginary part of alpha")
    p.add_argument(
        "--zero-index", type=int, help="take alpha from the zero table (1-based), overriding --alpha-re/--alpha-im"
    )
    p.add_argument("--k", type=int, help="modulus k of the g_k family")
    p.add_argument("--modulus", type=int, help="character modulus (3 or 4 built in)")
    p.add_argument("--chi", help="explicit character table, comma-separated values chi(0..q-1)")


def _add_output_flags(p: argparse.ArgumentParser, default_format: str) -> None:
    p.add_argument("--format", choices=("csv", "json"), default=default_format)
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="worker threads (default: all cores)")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized runs")


def _described(subparsers) -> None:
    """Make each subcommand's ``help`` its ``--help`` description as well."""
    plain = subparsers.add_parser

    def add_parser(name, **kw):
        kw.setdefault("description", kw.get("help"))
        return plain(name, **kw)

    subparsers.add_parser = add_parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="molab", description="Numerical laboratory for multiplicative functions with vanishing sum.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _described(sub)

    p = sub.add_parser("sieve", help="values f(n), n <= N, of a multiplicative function via the prime-power sieve")
    _add_function_flags(p)
    _add_param_flags(p)
    p.add_argument("--limit", type=int, required=True)
    _add_output_flags(p, "csv")

    p = sub.add_parser("sum", help="partial sums S(x) = sum_{n<=x} f(n) at geometric checkpoints")
    _add_function_flags(p)
    _add_param_flags(p)
    p.add_argument("--limit", type=int, required=True)
    _add_output_flags(p, "csv")

    p = sub.add_parser(
        "mo-check", help="evidence for the MO conditions: sum f(n) = 0 and non-vanishing Euler factors"
    )
    _add_function_flags(p)
    _add_param_flags(p)
    p.add_argument("--limit", type=int, required=True)
    p.add_argument("--pmax", type=int, required=True)
    p.add_argument("--tail", type=float, default=mo.DEFAULT_TAIL, help="target Euler tail bound")
    _add_output_flags(p, "json")

    p = sub.add_parser("euler", help="Euler factor sum_k f(p^k) at one prime with a certified tail bound")
    _add_function_flags(p)
    _add_param_flags(p)
    p.add_argument("--prime", type=int, required=True)
    p.add_argument("--tail", type=float, default=mo.DEFAULT_TAIL)
    p.add_argument("--closed-form", action="store_true", help="use the closed-form Euler factor")
    _add_output_flags(p, "json")

    p = sub.add_parser("distance", help="extended metric D(f,g) = sum_p sum_k |g(p^k) - f(p^k)|, truncated")
    _add_function_flags(p, "f", "--f")
    _add_function_flags(p, "g", "--g")
    _add_param_flags(p)
    p.add_argument("--pmax", type=int, required=True)
    p.add_argument("--kmax", type=int, required=True)
    _add_output_flags(p, "json")

    p = sub.add_parser("scan", help="Omega-type evidence: sup of w(x)|S(x)| over dyadic windows")
    _add_function_flags(p)
    _add_param_flags(p)
    p.add_argument("--limit", type=int, required=True)
    p.add_argument(
        "--weight", required=True, help="xlogx | xloglog2 | pow:C | xlogpow:E | xloglogpow:E (w = x^C, x log^E x, ...)"
    )
    p.add_argument("--xmin", type=int, default=2)
    _add_output_flags(p, "json")

    p = sub.add_parser("zero", help="zeros 1/2 + it of the Riemann zeta function")
    zsub = p.add_subparsers(dest="zero_command", required=True, parser_class=_Parser)
    _described(zsub)
    zf = zsub.add_parser("find", help="locate a zeta zero on the critical line near a guess (Hardy Z + Brent)")
    zf.add_argument("--guess", type=float, required=True)
    zf.add_argument("--tol", type=float, default=1e-10)
    _add_output_flags(zf, "csv")
    zv = zsub.add_parser("verify", help="check a zero table (index,imag) against |eta(1/2 + it)|")
    zv.add_argument("--table", help=f"CSV path (default: ${zeta.ZERO_TABLE_ENV} or the bundled table)")
    zv.add_argument("--tol", type=float, default=1e-8)
    _add_output_flags(zv, "csv")

    p = sub.add_parser(
        "transfer",
        help="closeness transfer: perturb f at finitely many prime powers and test that the sum stays 0",
    )
    _add_function_flags(p)
    _add_param_flags(p)
    p.add_argument("--override", action="append", default=[], metavar="p,k,re,im", help="set g(p^k) = re + i im")
    p.add_argument("--limit", type=int, required=True)
    p.add_argument("--pmax", type=int, default=10**4)
    _add_output_flags(p, "json")

    p = sub.add_parser(
        "multcheck", help="brute-force multiplicativity of g_k (1 - k on multiples of k, 1 elsewhere)"
    )
    p.add_argument("--gk", type=int, required=True)
    p.add_argument("--limit", type=int, required=True)
    _add_output_flags(p, "csv")

    p = sub.add_parser("metric-axioms", help="metric axioms of D on random finitely supported spec triples")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--pmax", type=int, default=50)
    p.add_argument("--kmax", type=int, default=5)
    _add_output_flags(p, "json")
    return parser


# --- helpers -----------------------------------------------------------------


def _alpha(args) -> Optional[complex]:
    if getattr(args, "zero_index", None) is not None:
        zeros = zeta.load_zero_table()
        if not 1 <= args.zero_index <= len(zeros):
            raise UsageError(f"--zero-index must lie in 1..{len(zeros)}")
        return zeros[args.zero_index - 1].rho
    if getattr(args, "alpha_re", None) is None:
        return None
    return complex(args.alpha_re, args.alpha_im)


def _entry(args, fid: str) -> catalog.CatalogEntry:
    table = None
    if getattr(args, "chi", None):
        table = [complex(v) for v in args.chi.split(",")]
    try:
        return catalog.make_entry(fid, _alpha(args), args.k, args.modulus, table)
    except (KeyError, ValueError) as exc:
        if isinstance(exc, MolabError):
            raise
        raise UsageError(str(exc).strip("'\"")) from None


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _report_json(report, threads: Optional[int] = None) -> str:
    d = report.to_dict()
    if threads is not None:
        d["threads"] = threads
    return _json(d)


def _g17(x: float) -> str:
    return f"{x:.17g}"


# --- subcommands -----------------------------------------------------------


def cmd_sieve(args) -> int:
    e = _entry(args, args.function)
    buf = io.StringIO()
    if args.format == "json":
        rows = []
        for lo, vals in iter_value_segments(e.spec, args.limit, threads=args.threads):
            rows.extend([lo + i, float(v.real), float(v.imag)] for i, v in enumerate(vals))
        _emit(args, _json({"schema_version": 1, "function": e.name, "limit": args.limit, "values": rows}))
        return EXIT_OK
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "re", "im"])
    for lo, vals in iter_value_segments(e.spec, args.limit, threads=args.threads):
        for i, v in enumerate(vals.tolist()):
            w.writerow([lo + i, _g17(v.real), _g17(v.imag)])
    _emit(args, buf.getvalue())
    return EXIT_OK


def cmd_sum(args) -> int:
    e = _entry(args, args.function)
    s = series.partial_sums(e.spec, args.limit, threads=args.threads)
    if args.format == "json":
        _emit(
            args,
            _json(
                {
                    "schema_version": 1,
                    "function": s.function_name,
                    "limit": s.limit,
                    "threads": args.threads,
                    "checkpoints": [[int(x), float(v.real), float(v.imag)] for x, v in zip(s.x, s.S)],
                }
            ),
        )
        return EXIT_OK
    buf = io.StringIO()
    s.write_csv(buf)
    _emit(args, buf.getvalue())
    return EXIT_OK


def cmd_mo_check(args) -> int:
    e = _entry(args, args.function)
    report = mo.mo_check(e, args.limit, args.pmax, args.tail, threads=args.threads)
    if args.format == "csv":
        ci, cii = report.condition_i, report.condition_ii
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["condition", "verdict", "detail"])
        w.writerow(["i", ci.verdict, f"c={ci.fitted_decay_exponent:.6g}"])
        w.writerow(["ii", cii.verdict, f"witness={cii.witness_prime}"])
        _emit(args, buf.getvalue())
    else:
        _emit(args, _report_json(report, args.threads))
    return EXIT_FAIL if report.failed else EXIT_OK


def cmd_euler(args) -> int:
    e = _entry(args, args.function)
    rep = mo.euler_factor_closed(e, args.prime) if args.closed_form else mo.euler_factor(e, args.prime, args.tail)
    if args.format == "csv":
        _emit(
            args,
            f"p,re,im,K,tail_bound,method\n{rep.p},{_g17(rep.value.real)},{_g17(rep.value.imag)},"
            f"{rep.K},{_g17(rep.tail_bound)},{rep.method}\n",
        )
    else:
        _emit(args, _report_json(rep))
    return EXIT_OK


def cmd_distance(args) -> int:
    f, g = _entry(args, args.f), _entry(args, args.g)
    table = build_spf_sieve(max(args.pmax, 2))
    d = mo.distance(f.spec, g.spec, args.pmax, args.kmax, table)
    out = d.to_dict()
    out.update(f=f.name, g=g.name, upper_bound=d.upper_bound)
    if args.format == "csv":
        ub = "" if d.upper_bound is None else _g17(d.upper_bound)
        tb = "" if d.tail_bound is None else _g17(d.tail_bound)
        _emit(args, f"lower_bound,tail_bound,upper_bound\n{_g17(d.lower_bound)},{tb},{ub}\n")
    else:
        _emit(args, _json(out))
    return EXIT_OK


def cmd_scan(args) -> int:
    e = _entry(args, args.function)
    try:
        weight = mo.Weight.parse(args.weight)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    table = build_spf_sieve(args.limit)
    rep = mo.omega_scan(e, args.limit, weight, args.xmin, table, threads=args.threads)
    if args.format == "csv":
        buf = io.StringIO()
        rep.write_csv(buf)
        _emit(args, buf.getvalue())
    else:
        _emit(args, _report_json(rep, args.threads))
    return EXIT_OK


def cmd_zero(args) -> int:
    if args.zero_command == "find":
        z = zeta.find_zero(args.guess, args.tol)
        if args.format == "json":
            _emit(args, _json({"schema_version": 1, "index": z.index, "imag": z.imag, "residual": z.residual}))
        else:
            _emit(args, f"index,imag,residual\n{z.index},{_g17(z.imag)},{z.residual:.3e}\n")
        return EXIT_OK
    zeros = zeta.load_zero_table(args.table, verify=True, verify_tol=args.tol)
    if args.format == "json":
        rows = [{"index": z.index, "imag": z.imag, "residual": z.residual} for z in zeros]
        _emit(args, _json({"schema_version": 1, "zeros": rows, "verified": True}))
    else:
        body = "".join(f"{z.index},{_g17(z.imag)},{z.residual:.3e}\n" for z in zeros)
        _emit(args, "index,imag,residual\n" + body)
    return EXIT_OK


def _parse_override(text: str):
    parts = text.split(",")
    if len(parts) != 4:
        raise UsageError(f"--override expects p,k,re,im; got {text!r}")
    try:
        p, k = int(parts[0]), int(parts[1])
        v = complex(float(parts[2]), float(parts[3]))
    except ValueError:
        raise UsageError(f"--override expects p,k,re,im; got {text!r}") from None
    if p < 2 or not all(p % d for d in range(2, math.isqrt(p) + 1)):
        raise UsageError(f"--override: {p} is not prime")
    if k < 1:
        raise UsageError("--override: k must be >= 1")
    return (p, k), v


def cmd_transfer(args) -> int:
    e = _entry(args, args.function)
    overrides = dict(_parse_override(o) for o in args.override)
    rep = mo.transfer_experiment(e, overrides, args.limit, p_max=args.pmax, threads=args.threads)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["status", "D_lower", "S_f_re", "S_f_im", "S_g_re", "S_g_im", "g_verdict"])
        sf, sg = rep.f_condition_i.S_at_limit, rep.g_condition_i.S_at_limit
        w.writerow(
            [rep.status, _g17(rep.distance.lower_bound), _g17(sf.real), _g17(sf.imag), _g17(sg.real), _g17(sg.imag),
             rep.g_condition_i.verdict]
        )
        _emit(args, buf.getvalue())
    else:
        _emit(args, _report_json(rep, args.threads))
    return EXIT_OK if rep.prediction_confirmed else EXIT_FAIL


def cmd_multcheck(args) -> int:
    if args.gk < 1 or args.limit < 1:
        raise UsageError("--gk and --limit must be >= 1")
    n = np.arange(args.limit + 1)
    values = np.where(n % args.gk == 0, 1 - args.gk, 1).astype(np.complex128)
    values[0] = 0
    verdict = mo.is_multiplicative_bruteforce(values)
    if args.format == "json":
        _emit(args, _report_json(verdict))
    elif verdict.passed:
        _emit(args, f"g_{args.gk} multiplicative on 1..{args.limit}\n")
    else:
        m, k = verdict.counterexample
        _emit(args, f"m={m} n={k}\n")
    return EXIT_OK if verdict.passed else EXIT_FAIL


def cmd_metric_axioms(args) -> int:
    rng = np.random.default_rng(args.seed)
    failures = []
    for i in range(args.trials):
        f, g, h = (mo.random_spec(rng, args.pmax, args.kmax, n) for n in "fgh")
        v = mo.metric_axiom_check(f, g, h, args.pmax, args.kmax)
        if not v.passed:
            failures.append({"trial": i, **v.to_dict()})
    out = {"schema_version": 1, "seed": args.seed, "trials": args.trials, "failures": failures}
    if args.format == "csv":
        _emit(args, f"trials,failures\n{args.trials},{len(failures)}\n")
    else:
        _emit(args, _json(out))
    return EXIT_FAIL if failures else EXIT_OK


COMMANDS = {
    "sieve": cmd_sieve,
    "sum": cmd_sum,
    "mo-check": cmd_mo_check,
    "euler": cmd_euler,
    "distance": cmd_distance,
    "scan": cmd_scan,
    "zero": cmd_zero,
    "transfer": cmd_transfer,
    "multcheck": cmd_multcheck,
    "metric-axioms": cmd_metric_axioms,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "threads", 1) < 1:
            raise UsageError("--threads must be >= 1")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (MolabError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
