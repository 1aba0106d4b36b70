"""Command-line surface: every operation as a reproducible, scriptable run.

Exit status: 0 when the requested check passed (or the command is purely
informational), 2 when a verified claim failed empirically, 1 on
operational errors, 64 on usage errors.  Identical configs produce
byte-identical output apart from the wall-time field.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import core, generalized, proportionality, strings, tree
from .errors import VersionMismatchError
from .reports import make_envelope, render
from .sharding import default_workers

EXIT_PASS = 0
EXIT_OPERATIONAL = 1
EXIT_CLAIM_FAILED = 2
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="collatzkit",
                     description="Empirical checks for the accelerated odd map "
                                 "in enumerated coordinates.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, helptext):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--format", choices=("json", "csv", "table"), default="json")
        return p

    p = add("map", "classify one position and show its image")
    p.add_argument("--x", type=int, required=True)

    p = add("string", "the maximal chain containing a position")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--max-steps", type=int, default=strings.DEFAULT_MAX_STEPS)

    p = add("scan", "verify the chain partition of [2..bound]")
    p.add_argument("--bound", type=int, required=True)
    p.add_argument("--max-steps", type=int, default=strings.DEFAULT_MAX_STEPS)
    p.add_argument("--workers", type=int, default=None)

    p = add("stats", "chain length statistics over tails <= bound")
    p.add_argument("--bound", type=int, required=True)
    p.add_argument("--max-steps", type=int, default=strings.DEFAULT_MAX_STEPS)
    p.add_argument("--workers", type=int, default=None)

    p = add("ysig", "realize a reverse signature at x (or derive the minimal one)")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--sig", type=str, default=None, help='literal like "y:0.2,0.1,5.2,0.1"')
    p.add_argument("--n", type=int, default=None, help="derive the minimal signature of length n")

    p = add("zsig", "forward signature of x over a number of steps")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--steps", type=int, required=True)

    p = add("recur", "exactly-one-per-window recurrence scan")
    p.add_argument("--sig", type=str, default=None, help='"y:..." or "z:..." literal')
    p.add_argument("--lo", type=int, default=None)
    p.add_argument("--hi", type=int, default=None)
    p.add_argument("--set", dest="generator", choices=proportionality.GENERATORS,
                   default=None, help="check every first-window signature of a generated set")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--windows", type=int, default=5)
    p.add_argument("--x", type=int, default=None, help="base position for --set equiv")

    p = add("tree", "reverse tree building from root [1..3^k]")
    p.add_argument("--k", type=int, default=None,
                   help="root exponent (taken from the checkpoint when resuming)")
    p.add_argument("--iterations", type=int, required=True)
    p.add_argument("--max-steps", type=int, default=strings.DEFAULT_MAX_STEPS)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--track-bound", type=int, default=0)
    p.add_argument("--checkpoint", type=str, default=None)
    p.add_argument("--resume", action="store_true",
                   help="load --checkpoint and extend it by --iterations")
    p.add_argument("--stats-out", type=str, default=None,
                   help="stream per-iteration stats to this file as JSON lines")

    p = add("parity", "pigeon/pigeonhole ratio table in exact rationals")
    p.add_argument("--depth", type=int, required=True)

    p = add("audit", "branch-pattern counts over the root block's heads")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--depth", type=int, required=True)

    p = add("coverage", "tree holes versus forward cover depths, per iteration")
    p.add_argument("--bound", type=int, required=True)
    p.add_argument("--root-k", type=int, required=True)
    p.add_argument("--iterations", type=int, required=True)
    p.add_argument("--max-steps", type=int, default=strings.DEFAULT_MAX_STEPS)
    p.add_argument("--workers", type=int, default=None)

    p = add("converge", "forward walks from [2..bound] into the root block")
    p.add_argument("--bound", type=int, required=True)
    p.add_argument("--root-k", type=int, required=True)
    p.add_argument("--max-steps", type=int, default=100_000)
    p.add_argument("--workers", type=int, default=None)

    p = add("pcycles", "exhaustive 3n+p cycle search up to a seed bound")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--bound", type=int, required=True)
    p.add_argument("--max-steps", type=int, default=1_000_000)

    return parser


def _workers(args) -> int:
    w = getattr(args, "workers", None)
    return default_workers() if w is None else max(1, w)


def _config(args) -> dict:
    skip = {"command", "format"}
    return {k.replace("_", "-"): v for k, v in vars(args).items()
            if k not in skip and v is not None}


def _run_map(args):
    return core.classify(args.x).as_payload(), 0


def _run_string(args):
    chain = strings.string_of(args.x, args.max_steps)
    payload = {
        "x": args.x,
        "tail": chain.tail,
        "head": chain.head,
        "length": len(chain),
        "elements": list(chain.elements),
    }
    return payload, 0


def _run_scan(args):
    report = strings.scan_strings(args.bound, args.max_steps, _workers(args))
    return report.as_payload(), len(report.violations)


def _run_stats(args):
    report = strings.string_stats(args.bound, args.max_steps, _workers(args))
    payload = report.as_payload()
    payload.pop("chains", None)
    ratios = strings.continuation_ratios(report.length_histogram)
    payload["continuation_ratios"] = [[l, round(r, 6)] for l, r in sorted(ratios.items())]
    return payload, len(report.violations)


def _run_ysig(args):
    if (args.sig is None) == (args.n is None):
        raise ValueError("give exactly one of --sig or --n")
    if args.sig is not None:
        sig = proportionality.parse_signature(args.sig)
        if not isinstance(sig, proportionality.ReverseSignature):
            raise ValueError("ysig needs a y:... literal")
    else:
        sig = proportionality.minimal_reverse_signature(args.x, args.n)
    result = proportionality.realize_reverse_signature(args.x, sig)
    payload = {
        "x": args.x,
        "signature": sig.text(),
        "modulus": sig.modulus,
        "final": result.final,
        "ok": result.ok,
    }
    return payload, 0


def _run_zsig(args):
    sig = proportionality.forward_signature_of(args.x, args.steps)
    return {"x": args.x, "steps": args.steps, "signature": sig.text(),
            "modulus": sig.modulus}, 0


def _run_recur(args):
    if args.generator is not None:
        if args.n is None:
            raise ValueError("--set needs --n")
        report = proportionality.verify_proportional_set(
            args.generator, args.n, args.windows, x=args.x)
        return report.as_payload(), 0 if report.ok else 1
    if args.sig is None or args.lo is None or args.hi is None:
        raise ValueError("recur needs --sig with --lo/--hi, or --set")
    sig = proportionality.parse_signature(args.sig)
    report = proportionality.verify_recurrence(sig, args.lo, args.hi)
    return report.as_payload(), 0 if report.ok else 1


def _run_tree(args):
    stream = open(args.stats_out, "w") if args.stats_out else None

    def on_iteration(row):
        if stream:
            stream.write(json.dumps(row.as_payload(), sort_keys=True) + "\n")

    try:
        if args.resume:
            if not args.checkpoint:
                raise ValueError("--resume needs --checkpoint")
            state = tree.load_checkpoint(args.checkpoint)
            tree.extend_tree(state, args.iterations, max_steps=args.max_steps,
                             workers=_workers(args), on_iteration=on_iteration)
        else:
            if args.k is None:
                raise ValueError("tree needs --k (or --resume with --checkpoint)")
            state = tree.build_tree(args.k, args.iterations, max_steps=args.max_steps,
                                    workers=_workers(args), track_bound=args.track_bound,
                                    on_iteration=on_iteration)
        if args.checkpoint:
            tree.save_checkpoint(state, args.checkpoint)
    finally:
        if stream:
            stream.close()
    duplicates = len(state.duplicates)
    cap_hits = sum(s.cap_hits for s in state.stats)
    payload = {
        "root_k": state.root_k,
        "iteration": state.iteration,
        "included_count": len(state.included),
        "frontier_size": len(state.frontier),
        "duplicates": duplicates,
        "cap_hits": cap_hits,
        "stats": [s.as_payload() for s in state.stats],
    }
    if args.checkpoint:
        payload["checkpoint"] = args.checkpoint
    return payload, duplicates + cap_hits


def _run_parity(args):
    return tree.parity_table(args.depth).as_payload(), 0


def _run_audit(args):
    report = tree.bucket_audit(args.k, args.depth)
    bad = sum(1 for row in report.rows if not row["exact"])
    return report.as_payload(), bad


def _run_coverage(args):
    report = tree.coverage_cross_check(args.bound, args.root_k, args.iterations,
                                       max_steps=args.max_steps,
                                       workers=_workers(args))
    mismatches = sum(1 for row in report.per_iteration if not row["match"])
    if sorted(report.depth_failures) != report.convergence_failures:
        mismatches += 1
    return report.as_payload(), mismatches


def _run_converge(args):
    report = tree.forward_convergence_check(args.bound, args.root_k,
                                            max_steps=args.max_steps,
                                            workers=_workers(args))
    return report.as_payload(), len(report.failures)


def _run_pcycles(args):
    catalog = generalized.cycle_search(args.p, args.bound, args.max_steps)
    return catalog.as_payload(), 0


_RUNNERS = {
    "map": _run_map,
    "string": _run_string,
    "scan": _run_scan,
    "stats": _run_stats,
    "ysig": _run_ysig,
    "zsig": _run_zsig,
    "recur": _run_recur,
    "tree": _run_tree,
    "parity": _run_parity,
    "audit": _run_audit,
    "coverage": _run_coverage,
    "converge": _run_converge,
    "pcycles": _run_pcycles,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    started = time.perf_counter()
    try:
        payload, violations = _RUNNERS[args.command](args)
    except ValueError as exc:
        print(f"collatzkit {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (VersionMismatchError, OSError, RuntimeError) as exc:
        print(f"collatzkit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_OPERATIONAL
    envelope = make_envelope(args.command, _config(args), payload, violations,
                             time.perf_counter() - started)
    try:
        sys.stdout.write(render(envelope, args.format))
    except ValueError as exc:
        print(f"collatzkit {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_PASS if violations == 0 else EXIT_CLAIM_FAILED


if __name__ == "__main__":
    sys.exit(main())
