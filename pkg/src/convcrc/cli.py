"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 search budget or state-space
limit, 3 result flagged under ``--strict``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from ._frontier import SearchBudgetError
from .construction import DEFAULT_STATE_LIMIT, StateSpaceError, build_equivalent, pud_bound_construction
from .convcode import from_octal, parse_octal_list
from .crc import parse_crc
from .crcsearch import CrcSearchBudgetError, SearchConfig, good_crc_over_lengths, search_best_crc
from .eventsearch import search_events
from .exclusion import build_cosets, pud_bound_exclusion
from .gf2poly import Gf2Poly
from .mcsim import StopRule, simulate_concatenated, simulate_equivalent_fer
from .probability import SNR_CONVENTIONS, SnrPoint

EXIT_OK, EXIT_USAGE, EXIT_BUDGET, EXIT_FLAGGED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _count(text: str) -> int:
    """Accept ``1e8`` style counts."""
    v = float(text)
    if v != int(v) or v < 1:
        raise argparse.ArgumentTypeError(f"{text!r} is not a positive integer")
    return int(v)


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _float_list(text: str) -> list[float]:
    """``3,4,5`` or ``start:stop:step`` (inclusive)."""
    if ":" in text:
        a, b, s = (float(t) for t in text.split(":"))
        if s <= 0:
            raise argparse.ArgumentTypeError("step must be positive")
        out, i = [], 0
        while a + i * s <= b + 1e-9:
            out.append(round(a + i * s, 10))
            i += 1
        return out
    return [float(t) for t in text.split(",") if t.strip()]


def _add_code(p):
    p.add_argument("--conv", required=True, help="octal generators, e.g. 133,171")
    p.add_argument("--nu", type=int, required=True, help="encoder memory")


def _add_crc(p):
    p.add_argument("--crc", required=True, help="CRC generator in Koopman hex (or full word)")
    p.add_argument("--crc-degree", type=int, required=True)


def _code(args):
    try:
        return from_octal(parse_octal_list(args.conv), args.nu)
    except ValueError as exc:
        raise UsageError(f"bad convolutional code: {exc}") from exc


def _crc(args):
    try:
        return parse_crc(args.crc, args.crc_degree)
    except ValueError as exc:
        raise UsageError(f"bad CRC: {exc}") from exc


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="convcrc", description="Undetected-error analysis of CRC + convolutional codes.")
    ap.add_argument("--threads", type=int, default=None, help="worker threads (default: all CPUs)")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("spectrum", help="error-event distance spectrum")
    _add_code(p)
    p.add_argument("--dmax", type=int, required=True)
    p.add_argument("--patterns", action="store_true", help="list every event pattern")
    p.add_argument("--max-length", type=int, default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("bound", help="undetected-error probability bound")
    p.add_argument("--method", choices=["exclusion", "construction"], default="construction")
    _add_crc(p)
    _add_code(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--snr-db", type=_float_list, required=True, help="list 3,4,5 or range 3:10:0.5")
    p.add_argument("--snr-convention", choices=SNR_CONVENTIONS, default="qpsk")
    p.add_argument("--pairwise", choices=["exact", "dfree-bound"], default="exact")
    p.add_argument("--dmax", type=int, required=True, help="search depth")
    p.add_argument("--ten-terms", action="store_true", help="series form of the tail")
    p.add_argument("--optimistic", action="store_true", help="leave the tail out of the total")
    p.add_argument("--strict", action="store_true", help="exit 3 when the tail is unavailable")
    p.add_argument("--state-limit", type=int, default=DEFAULT_STATE_LIMIT)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out", default=None)

    p = sub.add_parser("search-crc", help="best CRC of a degree for a code and length")
    p.add_argument("--degree", type=int, required=True)
    _add_code(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--lengths", type=_int_list, default=None, help="several k, e.g. 256,512,1024")
    p.add_argument("--max-distance", type=int, default=None)
    p.add_argument("--granularity", choices=["hybrid", "placements"], default="hybrid")
    p.add_argument("--out", default=None)

    p = sub.add_parser("simulate", help="Monte Carlo frame simulation")
    _add_crc(p)
    _add_code(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--snr-db", type=float, required=True)
    p.add_argument("--snr-convention", choices=SNR_CONVENTIONS, default="qpsk")
    p.add_argument("--min-undetected", type=_count, default=30)
    p.add_argument("--max-frames", type=_count, default=10**6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--equivalent-fer", action="store_true", help="FER of the equivalent code instead")
    p.add_argument("--out", default=None)

    p = sub.add_parser("cosets", help="x-cyclotomic cosets modulo p(x)")
    _add_crc(p)
    p.add_argument("--out", default=None)
    return ap


def cmd_spectrum(args) -> int:
    code = _code(args)
    if args.dmax < 1:
        raise UsageError("--dmax must be >= 1")
    sp = search_events(code, args.dmax, record_patterns=args.patterns, max_length=args.max_length)
    _emit(sp.to_json(), args.out)
    return EXIT_OK


def cmd_bound(args) -> int:
    code, spec = _code(args), _crc(args)
    snrs = [SnrPoint.from_db(db, args.snr_convention) for db in args.snr_db]
    kw = dict(
        ten_terms=args.ten_terms, optimistic=args.optimistic, snr_convention=args.snr_convention,
        pairwise=args.pairwise,
    )
    if args.method == "construction":
        try:
            rep = pud_bound_construction(code, spec, args.k, snrs, args.dmax, state_limit=args.state_limit, **kw)
        except StateSpaceError as exc:
            print(f"convcrc: {exc}; try --method exclusion", file=sys.stderr)
            return EXIT_BUDGET
    else:
        rep = pud_bound_exclusion(code, spec, args.k, snrs, args.dmax, **kw)
    _emit(rep.to_json() if args.format == "json" else rep.to_csv(), args.out)
    if rep.flagged:
        print("convcrc: tail term unavailable at some SNR points (transfer function diverges)", file=sys.stderr)
        if args.strict:
            return EXIT_FLAGGED
    return EXIT_OK


def cmd_search_crc(args) -> int:
    code = _code(args)
    cfg = SearchConfig(args.degree, code, args.k, args.max_distance, threads=args.threads, granularity=args.granularity)
    try:
        if args.lengths:
            rep = good_crc_over_lengths(cfg, args.lengths)
            _emit(rep.to_json(), args.out)
        else:
            _, audit = search_best_crc(cfg)
            _emit(audit.to_json(), args.out)
    except CrcSearchBudgetError as exc:
        _emit(exc.audit.to_json(), args.out)
        print(f"convcrc: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_OK


def cmd_simulate(args) -> int:
    code, spec = _code(args), _crc(args)
    snr = SnrPoint.from_db(args.snr_db, args.snr_convention)
    stop = StopRule(args.min_undetected, args.max_frames)
    if args.equivalent_fer:
        out = simulate_equivalent_fer(build_equivalent(spec, code), args.k, snr, stop, args.seed, args.threads)
    else:
        out = simulate_concatenated(spec, code, args.k, snr, stop, args.seed, args.threads)
    _emit(out.to_json(), args.out)
    for name, est in (("frame_error", out.fer), ("undetected", out.undetected_rate)):
        if est.low_confidence:
            print(f"convcrc: {name} rate rests on {est.events} events (low-confidence)", file=sys.stderr)
    return EXIT_OK


def cmd_cosets(args) -> int:
    spec = _crc(args)
    table = build_cosets(spec)
    doc = {
        "schema": "convcrc.cosets/1",
        "crc": spec.hex(),
        "crc_degree": spec.degree,
        "generator": str(spec.generator),
        "cosets": [
            {"size": len(c), "members": c, "polynomials": [str(Gf2Poly(r)) for r in c]} for c in table.cosets()
        ],
    }
    _emit(json.dumps(doc, indent=1, sort_keys=True), args.out)
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "bound": cmd_bound,
    "search-crc": cmd_search_crc,
    "simulate": cmd_simulate,
    "cosets": cmd_cosets,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is None:
        args.threads = os.cpu_count() or 1
    if args.threads < 1:
        print("convcrc: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"convcrc: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SearchBudgetError as exc:
        print(f"convcrc: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ValueError as exc:
        print(f"convcrc: {exc}", file=sys.stderr)
        return EXIT_USAGE


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
