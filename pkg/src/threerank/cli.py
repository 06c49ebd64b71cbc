"""Command-line entry point: ``threerank <subcommand> [options]``.

Exit status is 0 on success, 1 when the arguments are rejected and 2 when
an internal consistency check fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys

from . import cubic_forms, experiments
from .core_arith import (
    CongruencePair,
    MainTermParams,
    enumerate_discriminants,
    field_discriminant,
    is_fundamental,
    is_squarefree,
    s_plus_main_term,
)
from .quad_class.table import ClassGroupTable

WORKERS_ENV = "THREERANK_WORKERS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _sign(text: str) -> int:
    value = {"+": 1, "+1": 1, "1": 1, "-": -1, "-1": -1}.get(text)
    if value is None:
        raise argparse.ArgumentTypeError(f"sign must be + or -, got {text!r}")
    return value


def _ranges(text: str) -> list[tuple[int, int]]:
    out = []
    for chunk in text.split(","):
        try:
            x, y = chunk.split(":")
            out.append((int(x), int(y)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad range {chunk!r}; use x:y") from None
    return out


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None


def _emit_rows(names, rows, fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{k: r[k] for k in names} for r in rows], indent=2) + "\n"
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=names, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r[k] is None else r[k]) for k in names})
    return buf.getvalue()


def _emit_report(report, fmt: str) -> str:
    if fmt == "json":
        return experiments.to_json(report) + "\n"
    return experiments.to_csv(report)


# ------------------------------------------------------------ commands


def cmd_sieve(a, table):
    pair = CongruencePair(a.m, a.N)
    count = len(enumerate_discriminants(MainTermParams(a.X, pair, a.sign)))
    main = s_plus_main_term(MainTermParams(a.X, pair, 1)) if a.sign > 0 and pair.admissible else None
    ratio = count / main if main else None
    row = {"X": a.X, "m": a.m, "N": a.N, "sign": a.sign, "count": count, "main_term": main, "ratio": ratio}
    return _emit_rows(list(row), [row], a.format)


def cmd_classgroup(a, table):
    if not is_fundamental(a.disc):
        raise ValueError(f"{a.disc} is not a fundamental discriminant")
    info = table.info(a.disc)
    if a.format == "text":
        inv = ",".join(str(d) for d in info.invariant_factors) or "1"
        return f"disc={info.disc}, h_narrow={info.h_narrow}, h={info.h}, invariants={inv}\n"
    return _emit_rows(["disc", "h_narrow", "h", "invariant_factors"], [info.to_row()], a.format)


def cmd_r3(a, table):
    if a.n:
        ns = a.n
    elif a.lo is not None and a.hi is not None:
        ns = [v for v in range(a.lo, a.hi + 1) if v != 0]
    else:
        raise ValueError("give --n or both --from and --to")
    if any(v == 0 for v in ns):
        raise ValueError("0 is not allowed")
    ranks = table.p_ranks_of(ns, 3)
    rows = [{"n": n, "disc": field_discriminant(n), "r3": int(r)} for n, r in zip(ns, ranks)]
    return _emit_rows(["n", "disc", "r3"], rows, a.format)


def cmd_avg_torsion(a, table):
    dom = experiments.parse_domain(a.domain)
    value = experiments.avg_torsion(a.X, dom, a.p, table=table)
    row = {"X": a.X, "domain": dom.tag, "p": a.p, "value": value}
    return _emit_rows(list(row), [row], a.format)


def cmd_density(a, table):
    return _emit_report(experiments.indiv_density(a.X, a.k, a.domain, table=table), a.format)


def cmd_window(a, table):
    rep = experiments.window_search(a.lo, a.hi, a.k, a.n, a.domain, a.exclude_squares, table=table)
    if a.verify:
        bad = experiments.verify_window(rep)
        if bad:
            raise AssertionError(f"window hits failed re-verification: {bad[:10]}")
    return _emit_report(rep, a.format)


def cmd_table(a, table):
    return _emit_report(experiments.reproduce_table(a.ranges, table=table), a.format)


def cmd_scholz(a, table):
    if a.d is not None:
        ds = [a.d]
    elif a.X is not None:
        ds = [d for d in range(1, a.X + 1) if is_squarefree(d)]
    else:
        raise ValueError("give --d or --X")
    rows = []
    for d in ds:
        r, s, ok = experiments.scholz_check(d, table=table)
        rows.append({"d": d, "r": r, "s": s, "ok": int(ok)})
    text = _emit_rows(["d", "r", "s", "ok"], rows, a.format)
    if not all(r["ok"] for r in rows):
        raise AssertionError("reflection bound violated")
    return text


def cmd_byeon(a, table):
    value = experiments.byeon_fraction(a.Y, a.m, a.t, table=table)
    row = {"Y": a.Y, "m": a.m, "t": a.t, "fraction": value}
    return _emit_rows(list(row), [row], a.format)


def cmd_biquad(a, table):
    return _emit_report(experiments.biquad_grid(a.X, a.Y, table=table), a.format)


def cmd_cubic_enum(a, table):
    inv = cubic_forms.enumerate_classes(a.X, a.sign)
    rows = inv.rows()
    return _emit_rows(["a", "b", "c", "d", "disc", "maximal"], rows, a.format)


def cmd_dh_check(a, table):
    pair = CongruencePair(a.m, a.N)
    lhs, rhs = cubic_forms.dh_checksum(a.X, a.sign, pair, table=table)
    row = {"X": a.X, "sign": a.sign, "m": a.m, "N": a.N, "lhs": lhs, "rhs": rhs, "equal": int(lhs == rhs)}
    text = _emit_rows(list(row), [row], a.format)
    if lhs != rhs:
        sys.stdout.write(text)
        raise AssertionError(f"class counts disagree: {lhs} != {rhs}")
    return text


def cmd_composite_torsion(a, table):
    value = experiments.composite_torsion(a.X, a.m, table=table)
    row = {"X": a.X, "m": a.m, "value": value}
    return _emit_rows(list(row), [row], a.format)


# ------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--workers", type=int, default=None, help=f"compute threads (default: ${WORKERS_ENV})")
    common.add_argument("--format", choices=["csv", "json", "text"], default=None)
    common.add_argument("--cache", default=None, help="class group cache CSV")
    common.add_argument("--output", default=None, help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, default=None, help="accepted for interface stability; unused")
    common.add_argument("--verbose", action="store_true")

    p = _Parser(prog="threerank", description="3-divisibility of quadratic class numbers: experiments and tables.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    sp = add("sieve", cmd_sieve, "count fundamental discriminants in a residue class")
    sp.add_argument("--X", type=int, required=True)
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--N", type=int, default=1)
    sp.add_argument("--sign", type=_sign, default=1)

    sp = add("classgroup", cmd_classgroup, "class group of one fundamental discriminant")
    sp.add_argument("--disc", type=int, required=True)

    sp = add("r3", cmd_r3, "3-ranks of Q(sqrt n)")
    sp.add_argument("--n", type=_int_list, default=None, help="comma list; write --n=-23,5 when it starts with a minus")
    sp.add_argument("--from", dest="lo", type=int, default=None)
    sp.add_argument("--to", dest="hi", type=int, default=None)

    sp = add("avg-torsion", cmd_avg_torsion, "average p^r_p over a domain")
    sp.add_argument("--X", type=int, required=True)
    sp.add_argument("--domain", default="naturals", help="naturals | squarefree | multiples-of-3 | fundamental:m:N:sign")
    sp.add_argument("--p", type=int, default=3)

    sp = add("density", cmd_density, "share of the domain with r3 < k")
    sp.add_argument("--X", type=int, required=True)
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--domain", default="naturals")

    sp = add("window", cmd_window, "runs of consecutive class numbers prime to 3^k")
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--n", type=int, default=4)
    sp.add_argument("--from", dest="lo", type=int, required=True)
    sp.add_argument("--to", dest="hi", type=int, required=True)
    sp.add_argument("--domain", choices=["naturals", "squarefree", "negatives"], default="naturals")
    sp.add_argument("--exclude-squares", action="store_true")
    sp.add_argument("--verify", action="store_true", help="recheck every hit without the bulk kernels")

    sp = add("table", cmd_table, "counts of D[x,y] and S[x,y] next to the published values")
    sp.add_argument("--ranges", type=_ranges, default=None, help="x:y,x:y,... (default: published ranges)")

    sp = add("scholz", cmd_scholz, "3-ranks of Q(sqrt d) and Q(sqrt(-3d))")
    sp.add_argument("--d", type=int, default=None)
    sp.add_argument("--X", type=int, default=None)

    sp = add("byeon", cmd_byeon, "share of d with 3 prime to h(d) and h(td)")
    sp.add_argument("--Y", type=int, required=True)
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--t", type=int, default=-1)

    sp = add("biquad", cmd_biquad, "count (t, d) pairs for imaginary biquadratic fields")
    sp.add_argument("--X", type=int, required=True)
    sp.add_argument("--Y", type=int, required=True)

    sp = add("cubic-enum", cmd_cubic_enum, "GL2(Z)-classes of irreducible binary cubic forms")
    sp.add_argument("--X", type=int, required=True)
    sp.add_argument("--sign", type=_sign, default=1)

    sp = add("dh-check", cmd_dh_check, "compare cubic class counts with 3-ranks")
    sp.add_argument("--X", type=int, required=True)
    sp.add_argument("--sign", type=_sign, default=1)
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--N", type=int, default=1)

    sp = add("composite-torsion", cmd_composite_torsion, "average of prod_{p|m} p^r_p")
    sp.add_argument("--X", type=int, required=True)
    sp.add_argument("--m", type=int, required=True)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.format is None:
        args.format = "text" if args.command == "classgroup" else "csv"
    elif args.format == "text" and args.command != "classgroup":
        print("error: --format text is only available for classgroup", file=sys.stderr)
        return 1
    workers = args.workers
    if workers is None and os.environ.get(WORKERS_ENV):
        try:
            workers = int(os.environ[WORKERS_ENV])
        except ValueError:
            print(f"error: {WORKERS_ENV} must be an integer", file=sys.stderr)
            return 1
    if workers is not None and workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return 1
    try:
        table = ClassGroupTable(args.cache, workers)
        text = args.func(args, table)
    except AssertionError as exc:
        print(f"internal check failed: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
