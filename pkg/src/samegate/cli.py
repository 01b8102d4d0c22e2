"""Command-line front end.

Exit codes: 0 ok, 1 a checked threshold failed, 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import circuit_algebra as ca
from . import experiments as ex
from . import spectral_stats as st
from . import unitary_engine as ue
from .errors import InvalidInput

EXIT_OK, EXIT_THRESHOLD, EXIT_INVALID = 0, 1, 2


def _common_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=default(0), help="master seed (default 0)")
    parser.add_argument("--out", type=Path, default=default(None), help="write output here instead of stdout")
    parser.add_argument("--format", choices=("csv", "json"), default=default(None))
    parser.add_argument("--d", type=int, default=default(2), help="local dimension (default 2)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="samegate", description=__doc__)
    _common_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        _common_flags(p, suppress=True)
        return p

    p = add("classify", "canonical (q, r) class of a gate order")
    p.add_argument("sequence", help='comma-separated gate order, e.g. "1,4,3,6,5,2"')

    p = add("enumerate", "list the N-1 allowed (q, r) classes")
    p.add_argument("n", type=int)

    p = add("reduce", "move trace reducing a gate order to a double staircase")
    p.add_argument("sequence")

    p = add("compress", "greedy layer compression and filling fraction")
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--sequence")
    target.add_argument("--class", dest="qr", nargs=3, type=int, metavar=("N", "Q", "R"))
    p.add_argument("--periods", type=int, default=1)

    p = add("verify", "check the operator identities of one class")
    _class_args(p)
    p.add_argument("--identity-gate", action="store_true", help="use V = identity")
    p.add_argument("--no-sectors", action="store_true", help="skip the per-sector phase relation")

    p = add("spectrum", "eigenphases of the Floquet operator or its root in one sector")
    _class_args(p)
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--operator", choices=("floquet", "root"), default="floquet")
    p.add_argument("--index", type=int, default=0, help="gate sample index")

    p = add("lsd", "level-spacing statistics of a class over Haar gates")
    p.add_argument("n", type=int, nargs="?", default=12)
    p.add_argument("q", type=int, nargs="?", default=3)
    p.add_argument("r", type=int, nargs="?", default=2)
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--circuits", type=int, default=10)
    p.add_argument("--bins", type=int, default=40)
    p.add_argument("--s-max", type=float, default=4.0)
    p.add_argument("--small", action="store_true", help="quick preset N=8, (q, r)=(2, 1)")
    p.add_argument("--check", action="store_true", help="apply the full-scale KS thresholds")

    p = add("rains", "Monte Carlo check of the Haar power / union-of-blocks law")
    p.add_argument("dim", type=int)
    p.add_argument("q", type=int)
    p.add_argument("n", type=int, help="number of samples")
    p.add_argument("--threshold", type=float, default=None, help="fail (exit 1) when KS exceeds this")

    p = add("bruteforce", "partition all N! gate orders by closure under the moves")
    p.add_argument("n", type=int)
    p.add_argument("--force", action="store_true", help=f"allow N > {ca.BRUTEFORCE_MAX_N}")
    return parser


def _class_args(p):
    p.add_argument("n", type=int)
    p.add_argument("q", type=int)
    p.add_argument("r", type=int)


def _emit(args, text: str) -> None:
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _rows_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def cmd_classify(args) -> int:
    seq = ca.parse_sequence(args.sequence)
    cls = ca.classify(seq)
    record = {**cls.to_json(), "family": cls.family}
    _emit(args, _rows_csv([record]) if args.format == "csv" else _json(record))
    return EXIT_OK


def cmd_enumerate(args) -> int:
    rows = ex.enumerate_classes(args.n)
    _emit(args, _json({"n": args.n, "classes": rows}) if args.format == "json" else _rows_csv(rows))
    return EXIT_OK


def cmd_reduce(args) -> int:
    seq = ca.parse_sequence(args.sequence)
    p, moves = ca.reduce_to_fp(seq)
    record = {
        "n": seq.n_sites,
        "p": p,
        "canonical": str(ca.canonical_fp(seq.n_sites, p)),
        "moves": [str(m) for m in moves],
    }
    _emit(args, _json(record))
    return EXIT_OK


def cmd_compress(args) -> int:
    seq = ca.parse_sequence(args.sequence) if args.sequence else ca.canonical_fqr(*args.qr)
    report = ca.compress(seq, args.periods)
    record = {**report.to_json(), "sequence": str(seq), "asymptotic_filling": str(ca.asymptotic_filling(seq))}
    _emit(args, _json(record))
    return EXIT_OK


def cmd_verify(args) -> int:
    report = ex.verify_class(args.n, args.q, args.r, args.seed, args.d, args.identity_gate, not args.no_sectors)
    _emit(args, _json(report))
    return EXIT_OK if report["pass"] else EXIT_THRESHOLD


def cmd_spectrum(args) -> int:
    if not ca.is_allowed(args.n, args.q, args.r):
        raise ca.InvalidClassParameters(args.n, args.q, args.r)
    v = ex.circuit_gate(args.seed, args.index, args.d)
    basis = ue.momentum_basis(args.n, args.d, args.q, args.k)
    if args.operator == "floquet":
        op = ue.floquet_action(ca.canonical_fqr(args.n, args.q, args.r), v, args.d)
    else:
        op = ue.root_action(args.n, args.q, args.r, v, args.d)
    phases = ue.eigenphases(ue.restrict(op, basis))
    if args.format == "json":
        _emit(args, _json({"phases": phases.phases.tolist(), "dim": phases.dim}))
    else:
        _emit(args, phases.to_csv())
    return EXIT_OK


def cmd_lsd(args) -> int:
    n, q, r = (8, 2, 1) if args.small else (args.n, args.q, args.r)
    result = ex.lsd_experiment(n, q, r, args.k, args.circuits, args.seed, args.d, args.bins, args.s_max)
    ok = result.evaluate() if args.check else True
    summary = _json(result.to_json())
    if args.out is None:
        sys.stdout.write(summary if args.format == "json" else result.table_csv())
    else:
        args.out.write_text(result.table_csv())
        args.out.with_suffix(".json").write_text(summary)
        sys.stdout.write(summary)
    return EXIT_OK if ok else EXIT_THRESHOLD


def cmd_rains(args) -> int:
    report = st.rains_mc(args.dim, args.q, args.n, args.seed)
    record = report.to_json()
    ok = args.threshold is None or report.ks_distance <= args.threshold
    if args.threshold is not None:
        record["threshold"] = args.threshold
        record["pass"] = ok
    _emit(args, _json(record))
    return EXIT_OK if ok else EXIT_THRESHOLD


def cmd_bruteforce(args) -> int:
    report = ex.bruteforce_report(args.n, force=args.force)
    _emit(args, _json(report))
    return EXIT_OK


COMMANDS = {
    "classify": cmd_classify,
    "enumerate": cmd_enumerate,
    "reduce": cmd_reduce,
    "compress": cmd_compress,
    "verify": cmd_verify,
    "spectrum": cmd_spectrum,
    "lsd": cmd_lsd,
    "rains": cmd_rains,
    "bruteforce": cmd_bruteforce,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except InvalidInput as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
