"""Command-line entry points.

Subcommands: search (pattern scans over consecutive primes), admissible
(set construction and verification), certificate (build / verify /
scan), prime (indexing utilities). Machine-readable results go to
stdout; progress and reports go to stderr.

Exit codes: 0 success, 1 verification failure, 2 invalid input,
3 resource or bound exhausted, 4 interrupted (checkpoint state saved
if a checkpoint path was given).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .admissible import MAX_K, VARIANTS as SET_VARIANTS, AdmissibleSet, build_admissible, verify_properties
from .certificate import (
    Certificate,
    InfeasibleCutoffError,
    build_certificate,
    scan_progression,
    verify_certificate,
)
from .output import write_records, write_scan_hits
from .patterns import SignPattern, find_matches
from .primes import DEFAULT_MAX_VALUE, BoundExceededError, PrimeIndexer

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_BOUND = 3
EXIT_INTERRUPT = 4


def _sign(text: str) -> int:
    if text in ("+1", "1", "+"):
        return 1
    if text in ("-1", "-"):
        return -1
    raise argparse.ArgumentTypeError(f"expected +1 or -1, got {text!r}")


def _progress(label: str):
    started = time.monotonic()

    def report(n: int) -> None:
        rate = n / max(time.monotonic() - started, 1e-9)
        print(f"{label}: n={n:,} ({rate:,.0f}/s)", file=sys.stderr)

    return report


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="legsym",
        description="Consecutive-prime symbol patterns, admissible sets, "
        "and progression certificates.",
    )
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("search", help="scan prime windows for a pattern")
    p.add_argument("--m", type=int, required=True, help="window spans m+1 primes")
    p.add_argument(
        "--pattern",
        required=True,
        help="++, --, +-, -+ (word forms pp/mm/pm/mp), primroot, "
        "or matrix:<file>",
    )
    p.add_argument("--min-n", type=int, default=None)
    p.add_argument("--max-n", type=int, default=None, help="exclusive upper index")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--first", action="store_true", help="stop at first match")
    group.add_argument("--all", action="store_true", help="emit every match (default)")
    p.add_argument("--limit", type=int, default=None, help="stop after this many matches")
    p.add_argument("--strict", action="store_true",
                   help="additionally require per-pair exact-division witnesses")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--checkpoint", type=Path, default=None)
    p.add_argument("--format", choices=("jsonl", "csv", "bfile"), default="jsonl")
    p.add_argument("--max-value", type=int, default=DEFAULT_MAX_VALUE,
                   help="prime sieve bound")
    p.add_argument("--quiet", action="store_true")

    p = sub.add_parser("admissible", help="build and verify an admissible set")
    p.add_argument("--k", type=int, required=True, help=f"set size, 2..{MAX_K}")
    p.add_argument("--variant", choices=SET_VARIANTS, default="lemma22")
    p.add_argument("--output", "-o", type=Path, default=None)

    p = sub.add_parser("certificate", help="progression certificates")
    csub = p.add_subparsers(dest="action", required=True)

    b = csub.add_parser("build")
    b.add_argument("--from", dest="set_file", type=Path, required=True,
                   help="admissible set JSON")
    b.add_argument("--variant", choices=("thm13", "lemma32"), required=True)
    b.add_argument("--m", type=int, default=None)
    b.add_argument("--d1", type=_sign, default=None)
    b.add_argument("--d2", type=_sign, default=None)
    b.add_argument("--w", default="auto", help='cutoff, or "auto"')
    b.add_argument("--output", "-o", type=Path, default=None)

    v = csub.add_parser("verify")
    v.add_argument("cert_file", type=Path)

    s = csub.add_parser("scan")
    s.add_argument("cert_file", type=Path)
    s.add_argument("--min-n", type=int, default=1)
    s.add_argument("--max-n", type=int, required=True, help="exclusive")
    s.add_argument("--max-hits", type=int, default=None)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--checkpoint", type=Path, default=None)
    s.add_argument("--test-primality", choices=("auto", "yes", "no"), default="auto")
    s.add_argument("--quiet", action="store_true")

    p = sub.add_parser("prime", help="prime index utilities")
    psub = p.add_subparsers(dest="action", required=True)
    nth = psub.add_parser("nth")
    nth.add_argument("n", type=int)
    idx = psub.add_parser("index")
    idx.add_argument("p", type=int)
    win = psub.add_parser("window")
    win.add_argument("--m", type=int, required=True)
    win.add_argument("--n", type=int, required=True)

    return top


def _cmd_search(args) -> int:
    pattern = SignPattern.parse(args.pattern, args.m, strict=args.strict)
    limit = args.limit
    if args.first:
        limit = 1
    if args.max_n is None and limit is None:
        raise ValueError("open-ended search needs --first, --limit, or --max-n")
    indexer = PrimeIndexer(max_value=args.max_value)
    on_progress = None if args.quiet else _progress("search")
    records = find_matches(
        pattern,
        n_start=args.min_n,
        n_end=args.max_n,
        limit=limit,
        workers=args.workers,
        indexer=indexer,
        checkpoint_path=args.checkpoint,
        on_progress=on_progress,
    )
    write_records(records, sys.stdout, args.format)
    if limit is not None and len(records) < limit and args.max_n is None:
        return EXIT_BOUND
    return EXIT_OK


def _cmd_admissible(args) -> int:
    aset = build_admissible(args.k, args.variant)
    report = verify_properties(aset)
    blob = json.dumps(aset.to_dict(), indent=2)
    if args.output:
        args.output.write_text(blob + "\n")
    else:
        print(blob)
    pairs = args.k * (args.k - 1) // 2
    distinct = len(set(aset.witnesses.values()))
    print(
        f"admissible: k={args.k} variant={args.variant} "
        f"witnesses={distinct} distinct over {pairs} pairs "
        f"checks={'pass' if report.ok else 'FAIL'}",
        file=sys.stderr,
    )
    for failure in report.failures:
        print(f"  {failure}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_VERIFY


def _load_certificate(path: Path) -> Certificate:
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON ({exc})") from exc
    return Certificate.from_dict(data)


def _cmd_certificate(args) -> int:
    if args.action == "build":
        aset = AdmissibleSet.from_dict(json.loads(args.set_file.read_text()))
        w = args.w if args.w == "auto" else int(args.w)
        cert = build_certificate(
            aset, args.variant, m=args.m, d1=args.d1, d2=args.d2, w=w
        )
        blob = json.dumps(cert.to_dict(), indent=2)
        if args.output:
            args.output.write_text(blob + "\n")
        else:
            print(blob)
        print(
            f"certificate: variant={cert.variant} w={cert.w} "
            f"W={cert.W.bit_length()} bits, verified",
            file=sys.stderr,
        )
        return EXIT_OK

    if args.action == "verify":
        report = verify_certificate(_load_certificate(args.cert_file))
        for check in report.checks:
            if not check.ok:
                print(f"FAIL {check.name}: {check.detail}", file=sys.stderr)
        print(
            f"verify: {sum(c.ok for c in report.checks)}/{len(report.checks)} "
            f"checks pass",
            file=sys.stderr,
        )
        return EXIT_OK if report.ok else EXIT_VERIFY

    cert = _load_certificate(args.cert_file)
    tp = {"auto": None, "yes": True, "no": False}[args.test_primality]
    on_progress = None if args.quiet else _progress("scan")

    n_start = args.min_n
    prior_hits: list[dict] = []
    if args.checkpoint and args.checkpoint.exists():
        state = json.loads(args.checkpoint.read_text())
        n_start = max(n_start, state["last_n"] + 1)
        prior_hits = state["hits"]

    chunk = 50_000
    all_violations: list[str] = []
    hits_dicts = list(prior_hits)
    lo = n_start
    try:
        while lo < args.max_n:
            hi = min(lo + chunk, args.max_n)
            res = scan_progression(
                cert, lo, hi,
                max_hits=args.max_hits,
                test_primality=tp,
                workers=args.workers,
            )
            hits_dicts.extend(h.to_dict() for h in res.hits)
            all_violations.extend(res.violations)
            if args.checkpoint:
                args.checkpoint.write_text(
                    json.dumps({"last_n": hi - 1, "hits": hits_dicts})
                )
            if on_progress:
                on_progress(hi)
            if args.max_hits is not None and len(hits_dicts) >= args.max_hits:
                break
            lo = hi
    except KeyboardInterrupt:
        print("interrupted; checkpoint "
              + ("saved" if args.checkpoint else "not configured"),
              file=sys.stderr)
        return EXIT_INTERRUPT

    for hd in hits_dicts:
        print(json.dumps(hd))
    print(
        f"scan: {len(hits_dicts)} hits, {len(all_violations)} violations",
        file=sys.stderr,
    )
    for v in all_violations[:20]:
        print(f"  {v}", file=sys.stderr)
    return EXIT_OK if not all_violations else EXIT_VERIFY


def _cmd_prime(args) -> int:
    indexer = PrimeIndexer()
    if args.action == "nth":
        print(indexer.nth_prime(args.n))
    elif args.action == "index":
        print(indexer.index_of_prime(args.p))
    else:
        window = indexer.window(args.n, args.m)
        print(" ".join(str(p) for p in window.primes))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "search": _cmd_search,
        "admissible": _cmd_admissible,
        "certificate": _cmd_certificate,
        "prime": _cmd_prime,
    }[args.command]
    try:
        return handler(args)
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return EXIT_INTERRUPT
    except InfeasibleCutoffError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BOUND
    except BoundExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BOUND
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
