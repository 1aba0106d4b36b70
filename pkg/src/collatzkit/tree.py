"""Reverse tree building from a power-of-three root, with its accounting.

The tree starts from the root block [1..3^k].  Each iteration takes the
first higher equivalent of every position included in the previous
iteration; those are chain heads, and the full chains they head are
included.  Chains re-derived from root members that sit inside earlier
inclusions are skipped (the tree already holds them); any element of a
genuinely new chain that was already included is reported as a duplicate,
which the partition property says cannot happen.

Also here: the pigeon/pigeonhole ratio table (Fibonacci numerators over
doubling denominators), the bucket audit of backward branch patterns over
the root's heads, hole reporting against a scan bound, and the forward
convergence walk that serves as the coverage cross-oracle.
"""

from __future__ import annotations

import hashlib
import json
from array import array
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .core import conjugate_step
from .errors import (InsufficientRootError, StepCapExceededError,
                     VersionMismatchError)
from .proportionality import ReverseSignature, realize_reverse_signature
from .sharding import run_sharded, split_range
from .strings import DEFAULT_MAX_STEPS, _walk_back

DENSE_BOUND_DEFAULT = 1 << 23

CHECKPOINT_FORMAT = "collatzkit-tree-checkpoint"
CHECKPOINT_VERSION = 1


class IncludedSet:
    """Membership set: bitmap below a dense bound, hash set above it."""

    def __init__(self, dense_bound: int = DENSE_BOUND_DEFAULT):
        self.dense_bound = dense_bound
        self._bits = bytearray(dense_bound // 8 + 1)
        self._sparse: set[int] = set()
        self._count = 0

    def __contains__(self, p: int) -> bool:
        if p <= self.dense_bound:
            return bool(self._bits[p >> 3] & (1 << (p & 7)))
        return p in self._sparse

    def add(self, p: int) -> bool:
        """Insert p; True when p was not present before."""
        if p <= self.dense_bound:
            mask = 1 << (p & 7)
            if self._bits[p >> 3] & mask:
                return False
            self._bits[p >> 3] |= mask
        else:
            if p in self._sparse:
                return False
            self._sparse.add(p)
        self._count += 1
        return True

    def __len__(self) -> int:
        return self._count

    def sorted_sparse(self) -> list[int]:
        return sorted(self._sparse)

    def bitmap_bytes(self) -> bytes:
        return bytes(self._bits)


@dataclass
class IterationStats:
    iteration: int
    pigeons_added: int
    expected_pigeons: Fraction      # 3^i * 3^k, the asymptotic head count
    max_position: int
    pigeon_hole_ratio: Fraction     # new pigeons per position of reach
    rediscovered: int = 0
    duplicates: int = 0
    cap_hits: int = 0

    def as_payload(self) -> dict:
        return {
            "iteration": self.iteration,
            "pigeons_added": self.pigeons_added,
            "expected_pigeons": str(self.expected_pigeons),
            "max_position": _json_int(self.max_position),
            "pigeon_hole_ratio": str(self.pigeon_hole_ratio),
            "rediscovered": self.rediscovered,
            "duplicates": self.duplicates,
            "cap_hits": self.cap_hits,
        }


@dataclass
class TreeState:
    root_k: int
    iteration: int = 0
    dense_bound: int = DENSE_BOUND_DEFAULT
    track_bound: int = 0
    included: IncludedSet = None  # type: ignore[assignment]
    frontier: list[int] = field(default_factory=list)
    stats: list[IterationStats] = field(default_factory=list)
    low_inclusions: list[list[int]] = field(default_factory=list)
    duplicates: list[int] = field(default_factory=list)

    @property
    def root_size(self) -> int:
        return 3 ** self.root_k

    def __post_init__(self):
        if self.included is None:
            self.included = IncludedSet(self.dense_bound)
        if not self.frontier and self.iteration == 0:
            self.frontier = list(range(1, self.root_size + 1))


def _json_int(v: int):
    return v if -(2**63) <= v < 2**63 else str(v)


def _expand_shard(args: tuple[list[int], int]) -> list[tuple[int, ...] | None]:
    seeds, max_steps = args
    chains: list[tuple[int, ...] | None] = []
    for e in seeds:
        head = 4 * e - 1
        try:
            chains.append(tuple(_walk_back(head, max_steps)) + (head,))
        except StepCapExceededError:
            chains.append(None)
    return chains


def _chunk(items: list, parts: int) -> list[list]:
    parts = max(1, min(parts, len(items)))
    base, extra = divmod(len(items), parts)
    out, start = [], 0
    for i in range(parts):
        size = base + (1 if i < extra else 0)
        out.append(items[start:start + size])
        start += size
    return out


def extend_tree(state: TreeState, iterations: int,
                max_steps: int = DEFAULT_MAX_STEPS, workers: int = 1,
                on_iteration=None) -> TreeState:
    """Run more tree iterations in place; frontier elements seed the next round."""
    for _ in range(iterations):
        state.iteration += 1
        seeds = state.frontier
        shards = [(chunk, max_steps) for chunk in _chunk(seeds, workers)]
        chain_lists = run_sharded(_expand_shard, shards, workers)
        new_positions: list[int] = []
        low: list[int] = []
        rediscovered = duplicates = cap_hits = 0
        max_position = 0
        for chains in chain_lists:
            for chain in chains:
                if chain is None:
                    cap_hits += 1
                    continue
                if chain[-1] in state.included:
                    rediscovered += 1
                    continue
                for p in chain:
                    if state.included.add(p):
                        new_positions.append(p)
                        if p > max_position:
                            max_position = p
                        if p <= state.track_bound:
                            low.append(p)
                    else:
                        duplicates += 1
                        state.duplicates.append(p)
        row = IterationStats(
            iteration=state.iteration,
            pigeons_added=len(new_positions),
            expected_pigeons=Fraction(3 ** state.iteration * state.root_size),
            max_position=max_position,
            pigeon_hole_ratio=(Fraction(len(new_positions), max_position)
                               if max_position else Fraction(0)),
            rediscovered=rediscovered,
            duplicates=duplicates,
            cap_hits=cap_hits,
        )
        state.stats.append(row)
        state.low_inclusions.append(low)
        state.frontier = new_positions
        if on_iteration is not None:
            on_iteration(row)
    return state


def build_tree(root_k: int, iterations: int, max_steps: int = DEFAULT_MAX_STEPS,
               workers: int = 1, dense_bound: int = DENSE_BOUND_DEFAULT,
               track_bound: int = 0, on_iteration=None) -> TreeState:
    """Build a fresh tree on root [1..3^root_k] for the given iteration count.

    track_bound, when positive, records which positions <= track_bound were
    newly included at each iteration (needed for per-iteration hole
    reports).  Growth is roughly threefold per iteration; desk-scale use
    means root_k + iterations small enough that 3^(k+i) stays in memory.
    """
    if root_k < 1 or iterations < 0:
        raise ValueError("need root_k >= 1 and iterations >= 0")
    state = TreeState(root_k=root_k, dense_bound=dense_bound, track_bound=track_bound)
    return extend_tree(state, iterations, max_steps=max_steps, workers=workers,
                       on_iteration=on_iteration)


@dataclass
class CoverageReport:
    bound: int
    iteration: int
    covered: int
    holes: list[int]

    def as_payload(self) -> dict:
        payload = {
            "bound": self.bound,
            "iteration": self.iteration,
            "covered": self.covered,
            "hole_count": len(self.holes),
        }
        if len(self.holes) <= 500:
            payload["holes"] = list(self.holes)
        return payload


def coverage_report(state: TreeState, bound: int) -> CoverageReport:
    """Positions of [2..bound] in neither the root block nor any included chain."""
    root_n = state.root_size
    holes = [x for x in range(2, bound + 1)
             if x > root_n and x not in state.included]
    covered = max(bound - 1, 0) - len(holes)
    return CoverageReport(bound=bound, iteration=state.iteration,
                          covered=covered, holes=holes)


def _chain_head_of(x: int, max_steps: int) -> int:
    steps = 0
    while x & 3 != 3:
        x = (3 * x) >> 1 if x % 2 == 0 else (3 * x + 1) >> 2
        steps += 1
        if steps > max_steps:
            raise StepCapExceededError(f"no chain head within {max_steps} steps")
    return x


def cover_depth(x: int, root_k: int, max_steps: int = DEFAULT_MAX_STEPS) -> int:
    """Iterations of tree building before x's chain is included.

    Walks forward: climb x's chain to its head, step down to the position
    the head is the first higher equivalent of, repeat until inside the
    root block.  Root members need 0 iterations.
    """
    if x < 1:
        raise ValueError("positions start at 1")
    root_n = 3 ** root_k
    depth = 0
    cur = x
    while cur > root_n:
        head = _chain_head_of(cur, max_steps)
        cur = (head + 1) >> 2
        depth += 1
        if depth > max_steps:
            raise StepCapExceededError(f"cover depth of {x} exceeds {max_steps}")
    return depth


def _depth_shard(args: tuple[int, int, int, int]) -> tuple[list[int], list[int]]:
    lo, hi, root_k, max_steps = args
    depths, failures = [], []
    for x in range(lo, hi + 1):
        try:
            depths.append(cover_depth(x, root_k, max_steps))
        except StepCapExceededError:
            depths.append(-1)
            failures.append(x)
    return depths, failures


def cover_depths(bound: int, root_k: int, max_steps: int = DEFAULT_MAX_STEPS,
                 workers: int = 1) -> tuple[dict[int, int], list[int]]:
    """Cover depth for every position in [2..bound]; -1 marks cap failures."""
    shards = [(lo, hi, root_k, max_steps) for lo, hi in split_range(2, bound, workers)]
    depths: dict[int, int] = {}
    failures: list[int] = []
    pos = 2
    for part_depths, part_failures in run_sharded(_depth_shard, shards, workers):
        for d in part_depths:
            depths[pos] = d
            pos += 1
        failures.extend(part_failures)
    return depths, failures


# ---------------------------------------------------------------------------
# forward convergence
# ---------------------------------------------------------------------------

@dataclass
class ConvergenceReport:
    bound: int
    root_k: int
    max_steps: int
    checked: int
    failures: list[int]
    max_excursion_value: int
    max_excursion_seed: int
    max_steps_to_root: int
    max_steps_seed: int
    total_steps: int

    @property
    def ok(self) -> bool:
        return not self.failures

    def as_payload(self) -> dict:
        return {
            "bound": self.bound,
            "root_k": self.root_k,
            "max_steps": self.max_steps,
            "checked": self.checked,
            "failure_count": len(self.failures),
            "failures": self.failures[:100],
            "max_excursion_value": _json_int(self.max_excursion_value),
            "max_excursion_seed": self.max_excursion_seed,
            "max_steps_to_root": self.max_steps_to_root,
            "max_steps_seed": self.max_steps_seed,
            "total_steps": self.total_steps,
            "mean_steps": (self.total_steps / self.checked) if self.checked else 0.0,
        }


def _convergence_shard(args: tuple[int, int, int, int, int]) -> tuple:
    lo, hi, root_n, max_steps, memo_hi = args
    # steps-to-root and orbit-peak caches (single-worker path only); peaks
    # live in a plain list so huge excursions cannot overflow a fixed width
    steps_memo = array("q", [-1]) * (memo_hi + 1)
    peak_memo: list[int] = [0] * (memo_hi + 1)
    failures: list[int] = []
    peak_val = peak_seed = 0
    worst_steps = -1
    worst_seed = 0
    total_steps = 0
    for x in range(lo, hi + 1):
        cur = x
        path = []
        failed = False
        while cur > root_n:
            if cur <= memo_hi and steps_memo[cur] >= 0:
                break
            path.append(cur)
            if len(path) > max_steps:
                failed = True
                break
            cur = conjugate_step(cur)
        if failed:
            failures.append(x)
            continue
        if cur <= root_n:
            base_steps, running_peak = 0, cur
        else:
            base_steps, running_peak = steps_memo[cur], peak_memo[cur]
        steps_x = base_steps + len(path)
        for i, p in enumerate(reversed(path), start=1):
            if p > running_peak:
                running_peak = p
            if p <= memo_hi:
                steps_memo[p] = base_steps + i
                peak_memo[p] = running_peak
        orbit_peak = max(running_peak, x)
        total_steps += steps_x
        if orbit_peak > peak_val or (orbit_peak == peak_val and x < peak_seed):
            peak_val, peak_seed = orbit_peak, x
        if steps_x > worst_steps:
            worst_steps, worst_seed = steps_x, x
    return (hi - lo + 1, failures, peak_val, peak_seed, worst_steps,
            worst_seed, total_steps)


def forward_convergence_check(bound: int, root_k: int,
                              max_steps: int = 100_000,
                              workers: int = 1) -> ConvergenceReport:
    """Iterate the conjugate step from every x in [2..bound] until it enters [1..3^root_k].

    Step counts and the largest excursion are recorded; trajectories that
    outlast max_steps land in the failure list (they are data, not errors).
    The aggregate report does not depend on the worker count.
    """
    if bound < 2:
        raise ValueError("bound must be >= 2")
    root_n = 3 ** root_k
    spans = split_range(2, bound, workers)
    shards = [(lo, hi, root_n, max_steps, hi if workers == 1 else 0)
              for lo, hi in spans]
    checked = total_steps = 0
    failures: list[int] = []
    peak_val = peak_seed = 0
    worst_steps = -1
    worst_seed = 0
    for (cnt, fails, pv, ps, ws, wseed, tot) in run_sharded(_convergence_shard, shards, workers):
        checked += cnt
        failures.extend(fails)
        total_steps += tot
        if pv > peak_val or (pv == peak_val and ps and (not peak_seed or ps < peak_seed)):
            peak_val, peak_seed = pv, ps
        if ws > worst_steps or (ws == worst_steps and wseed and (not worst_seed or wseed < worst_seed)):
            worst_steps, worst_seed = ws, wseed
    return ConvergenceReport(bound=bound, root_k=root_k, max_steps=max_steps,
                             checked=checked, failures=sorted(failures),
                             max_excursion_value=peak_val,
                             max_excursion_seed=peak_seed,
                             max_steps_to_root=worst_steps,
                             max_steps_seed=worst_seed,
                             total_steps=total_steps)


# ---------------------------------------------------------------------------
# coverage cross-check: materialized tree versus forward walks
# ---------------------------------------------------------------------------

@dataclass
class CrossCheckReport:
    bound: int
    root_k: int
    iterations: int
    per_iteration: list[dict]
    max_depth: int
    depth_failures: list[int]
    convergence_failures: list[int]
    agree: bool

    @property
    def ok(self) -> bool:
        return self.agree

    def as_payload(self) -> dict:
        return {
            "bound": self.bound,
            "root_k": self.root_k,
            "iterations": self.iterations,
            "per_iteration": self.per_iteration,
            "max_depth": self.max_depth,
            "depth_failure_count": len(self.depth_failures),
            "convergence_failure_count": len(self.convergence_failures),
            "agree": self.agree,
        }


def coverage_cross_check(bound: int, root_k: int, iterations: int,
                         max_steps: int = DEFAULT_MAX_STEPS,
                         workers: int = 1) -> CrossCheckReport:
    """Compare tree-build holes against forward cover depths, iteration by iteration.

    Route one materializes the tree and reads holes off the included set;
    route two walks forward from every scanned position counting how many
    inclusions it needs.  Both must name the same holes after every
    iteration; the forward route also determines how many iterations a full
    cover needs (the materialized tree triples per iteration, so only the
    requested prefix is materialized).
    """
    state = build_tree(root_k, 0, max_steps=max_steps, track_bound=bound)
    depths, depth_failures = cover_depths(bound, root_k, max_steps, workers)
    convergence = forward_convergence_check(bound, root_k, max_steps=100_000,
                                            workers=workers)
    root_n = state.root_size
    uncovered = {x for x in range(2, bound + 1) if x > root_n}
    per_iteration = []
    agree = True
    for i in range(1, iterations + 1):
        extend_tree(state, 1, max_steps=max_steps, workers=workers)
        uncovered.difference_update(state.low_inclusions[-1])
        expected = {x for x, d in depths.items() if d > i or d < 0}
        match = uncovered == expected
        agree = agree and match
        per_iteration.append({
            "iteration": i,
            "holes": len(uncovered),
            "forward_expectation": len(expected),
            "match": match,
        })
    max_depth = max((d for d in depths.values() if d >= 0), default=0)
    agree = agree and sorted(depth_failures) == convergence.failures
    return CrossCheckReport(bound=bound, root_k=root_k, iterations=iterations,
                            per_iteration=per_iteration, max_depth=max_depth,
                            depth_failures=sorted(depth_failures),
                            convergence_failures=convergence.failures,
                            agree=agree)


# ---------------------------------------------------------------------------
# pigeon/pigeonhole parity series
# ---------------------------------------------------------------------------

@dataclass
class ParityTable:
    rows: list[tuple[int, Fraction, Fraction, Fraction]]  # (bucket, pigeons, holes, ratio)
    partial_sums: list[Fraction]

    def as_payload(self) -> dict:
        return {
            "depth": len(self.rows),
            "rows": [{
                "bucket": r,
                "pigeons": str(p),
                "pigeonholes": str(h),
                "ratio": f"{p}/{h}",
                "partial_sum": str(s),
            } for (r, p, h, _), s in zip(self.rows, self.partial_sums)],
            "final_sum": str(self.partial_sums[-1]) if self.partial_sums else "0",
            "gap_to_one": float(1 - self.partial_sums[-1]) if self.partial_sums else 1.0,
        }


def parity_table(depth: int) -> ParityTable:
    """Exact pigeon/pigeonhole rows: Fibonacci numerators over 2^(r+1).

    Bucket r collects the backward branch paths whose branch indices sum to
    r-1; there are Fibonacci(r) of them and each confines its pigeons to
    2^(r+1) pigeonholes per root element.  Partial sums grow toward 1 in
    exact rational arithmetic.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    rows = []
    sums = []
    total = Fraction(0)
    fib_prev, fib = 0, 1
    for r in range(1, depth + 1):
        holes = Fraction(2 ** (r + 1))
        ratio = Fraction(fib) / holes
        total += ratio
        rows.append((r, Fraction(fib), holes, ratio))
        sums.append(total)
        fib_prev, fib = fib, fib_prev + fib
    return ParityTable(rows=rows, partial_sums=sums)


# ---------------------------------------------------------------------------
# bucket audit of backward branch patterns over the root's heads
# ---------------------------------------------------------------------------

@dataclass
class BucketAuditReport:
    root_k: int
    depth: int
    rows: list[dict]
    exact: bool

    @property
    def ok(self) -> bool:
        return self.exact

    def as_payload(self) -> dict:
        return {
            "root_k": self.root_k,
            "depth": self.depth,
            "rows": self.rows,
            "exact": self.exact,
        }


def bucket_audit(root_k: int, depth: int) -> BucketAuditReport:
    """Count zero-equivalent branch patterns over the heads of the root block.

    The heads 4x-1 for x in [1..3^k] must realize every branch pattern of
    length d <= depth exactly 3^(k-d) times; depth beyond k cannot be
    supported by the root and is rejected.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if depth > root_k:
        raise InsufficientRootError(
            f"depth {depth} exceeds root exponent {root_k}")
    heads = [4 * x - 1 for x in range(1, 3 ** root_k + 1)]
    rows = []
    exact = True
    for d in range(1, depth + 1):
        expected = 3 ** (root_k - d)
        for pattern in product((1, 2), repeat=d):
            sig = ReverseSignature(tuple((0, b) for b in pattern))
            count = sum(1 for h in heads if realize_reverse_signature(h, sig).ok)
            ok = count == expected
            exact = exact and ok
            rows.append({
                "length": d,
                "pattern": ",".join(str(b) for b in pattern),
                "count": count,
                "expected": expected,
                "exact": ok,
            })
    return BucketAuditReport(root_k=root_k, depth=depth, rows=rows, exact=exact)


# ---------------------------------------------------------------------------
# checkpointing
# ---------------------------------------------------------------------------

def save_checkpoint(state: TreeState, path) -> None:
    """Write a versioned header + bitmap + JSON body; fully deterministic."""
    bitmap = state.included.bitmap_bytes()
    header = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "root_k": state.root_k,
        "iteration": state.iteration,
        "dense_bound": state.dense_bound,
        "track_bound": state.track_bound,
        "bitmap_len": len(bitmap),
    }
    body = {
        "sparse": [str(p) for p in state.included.sorted_sparse()],
        "frontier": [str(p) for p in state.frontier],
        "stats": [s.as_payload() for s in state.stats],
        "low_inclusions": state.low_inclusions,
        "duplicates": [str(p) for p in state.duplicates],
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        fh.write(bitmap)
        fh.write(b"\n" + json.dumps(body, sort_keys=True).encode())


def load_checkpoint(path) -> TreeState:
    """Rebuild a TreeState from disk; anything unexpected raises VersionMismatchError."""
    with open(path, "rb") as fh:
        raw = fh.read()
    nl = raw.find(b"\n")
    if nl < 0:
        raise VersionMismatchError("checkpoint has no header line")
    try:
        header = json.loads(raw[:nl])
    except json.JSONDecodeError as exc:
        raise VersionMismatchError(f"checkpoint header is not JSON: {exc}") from None
    if not isinstance(header, dict) or header.get("format") != CHECKPOINT_FORMAT:
        raise VersionMismatchError("not a tree checkpoint file")
    if header.get("version") != CHECKPOINT_VERSION:
        raise VersionMismatchError(
            f"checkpoint version {header.get('version')} != {CHECKPOINT_VERSION}")
    bitmap_len = header["bitmap_len"]
    bitmap_start = nl + 1
    bitmap = raw[bitmap_start:bitmap_start + bitmap_len]
    try:
        body = json.loads(raw[bitmap_start + bitmap_len + 1:])
    except json.JSONDecodeError as exc:
        raise VersionMismatchError(f"checkpoint body is not JSON: {exc}") from None
    state = TreeState(root_k=header["root_k"], iteration=header["iteration"],
                      dense_bound=header["dense_bound"],
                      track_bound=header["track_bound"])
    state.included = IncludedSet(header["dense_bound"])
    state.included._bits = bytearray(bitmap)
    count = sum(bin(b).count("1") for b in bitmap)
    state.included._sparse = {int(p) for p in body["sparse"]}
    state.included._count = count + len(state.included._sparse)
    state.frontier = [int(p) for p in body["frontier"]]
    state.low_inclusions = [list(map(int, row)) for row in body["low_inclusions"]]
    state.duplicates = [int(p) for p in body["duplicates"]]
    state.stats = [IterationStats(
        iteration=row["iteration"],
        pigeons_added=row["pigeons_added"],
        expected_pigeons=Fraction(row["expected_pigeons"]),
        max_position=int(row["max_position"]),
        pigeon_hole_ratio=Fraction(row["pigeon_hole_ratio"]),
        rediscovered=row["rediscovered"],
        duplicates=row["duplicates"],
        cap_hits=row["cap_hits"],
    ) for row in body["stats"]]
    return state


def checkpoint_digest(path) -> str:
    """Stable content hash of a checkpoint file."""
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()
