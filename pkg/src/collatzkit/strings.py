"""Maximal one-to-one chains ("strings") and the partition scan.

Every position >= 2 lies on exactly one maximal chain under the one-to-one
step: the chain starts at a tail (= 2 mod 3, no backward step) and ends at
a head (= 3 mod 4, no forward step).  Position 1 is the trivial loop and
belongs to no chain.  Finiteness of chains is not assumed: walks carry a
step cap and revisit detection, and the scan reports violations instead of
aborting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .core import chain_next, chain_prev
from .errors import StepCapExceededError, TrivialLoopError
from .sharding import run_sharded, split_range

DEFAULT_MAX_STEPS = 10_000

# chains are kept verbatim in reports only below this bound
KEEP_CHAINS_BOUND = 10_000


@dataclass(frozen=True)
class StringChain:
    """One maximal chain, tail first, head last."""

    elements: tuple[int, ...]

    @property
    def tail(self) -> int:
        return self.elements[0]

    @property
    def head(self) -> int:
        return self.elements[-1]

    def __len__(self) -> int:
        return len(self.elements)


@dataclass
class PartitionReport:
    """Result of scanning [2..bound] for chain coverage."""

    scanned_bound: int
    strings_found: int = 0         # chains whose tail is <= bound
    border_chains: int = 0         # chains containing scanned positions but with tail > bound
    element_count: int = 0         # positions in [2..bound] covered by exactly one chain
    violations: list[tuple[int, str]] = field(default_factory=list)
    mean_length: Fraction = Fraction(0)
    length_histogram: dict[int, int] = field(default_factory=dict)
    chains: list[StringChain] | None = None

    @property
    def ok(self) -> bool:
        return not self.violations

    def as_payload(self) -> dict:
        payload = {
            "bound": self.scanned_bound,
            "strings_found": self.strings_found,
            "border_chains": self.border_chains,
            "element_count": self.element_count,
            "violation_count": len(self.violations),
            "violations": [{"position": p, "kind": k} for p, k in sorted(self.violations)],
            "mean_length": str(self.mean_length),
            "mean_length_float": float(self.mean_length) if self.mean_length else 0.0,
            "length_histogram": [[l, c] for l, c in sorted(self.length_histogram.items())],
        }
        if self.chains is not None:
            payload["chains"] = [list(c.elements) for c in self.chains]
        return payload


def _walk_back(x: int, max_steps: int) -> list[int]:
    """Positions strictly before x on its chain, tail first."""
    back = []
    seen = {x}
    cur = x
    while cur % 3 != 2:
        cur, _ = chain_prev(cur)
        if cur in seen:
            raise StepCapExceededError(f"cycle revisiting {cur} while walking back from {x}")
        if len(back) >= max_steps:
            raise StepCapExceededError(f"backward walk from {x} exceeded {max_steps} steps")
        seen.add(cur)
        back.append(cur)
    back.reverse()
    return back


def _walk_forward(x: int, max_steps: int) -> list[int]:
    """Positions strictly after x on its chain, head last."""
    fwd = []
    seen = {x}
    cur = x
    while cur & 3 != 3:
        cur = chain_next(cur)
        if cur in seen:
            raise StepCapExceededError(f"cycle revisiting {cur} while walking forward from {x}")
        if len(fwd) >= max_steps:
            raise StepCapExceededError(f"forward walk from {x} exceeded {max_steps} steps")
        seen.add(cur)
        fwd.append(cur)
    return fwd


def string_of(x: int, max_steps: int = DEFAULT_MAX_STEPS) -> StringChain:
    """Full maximal chain containing x.

    Walks backward to the tail (residue 2 mod 3) and forward to the head
    (= 3 mod 4).  Raises TrivialLoopError for x = 1 and StepCapExceededError
    if either walk runs past max_steps or revisits a position.
    """
    if x == 1:
        raise TrivialLoopError("position 1 is the trivial loop, not part of any chain")
    if x < 1:
        raise ValueError("positions start at 1")
    return StringChain(tuple(_walk_back(x, max_steps) + [x] + _walk_forward(x, max_steps)))


def _chain_shard(args: tuple[int, int, int]) -> list[tuple[int, ...]]:
    lo, hi, max_steps = args
    out = []
    first_tail = lo + ((2 - lo) % 3)
    for t in range(first_tail, hi + 1, 3):
        try:
            out.append((t, *_walk_forward(t, max_steps)))
        except StepCapExceededError:
            out.append((t,))  # flagged later: forward walk failed
    return out


def scan_strings(bound: int, max_steps: int = DEFAULT_MAX_STEPS,
                 workers: int = 1) -> PartitionReport:
    """Enumerate every chain meeting [2..bound] and verify the partition claim.

    Chains are seeded from tails <= bound (sharded across workers), then any
    still-uncovered position triggers a backward walk to its out-of-range
    tail.  Violations record double covers, uncovered positions, residue
    breaks, cycles, and step-cap hits; the report is deterministic for any
    worker count.
    """
    if bound < 2:
        raise ValueError("bound must be >= 2")
    report = PartitionReport(scanned_bound=bound)
    owner: dict[int, int] = {}
    violations = report.violations

    def adopt(elements: tuple[int, ...]) -> None:
        tail = elements[0]
        if tail % 3 != 2:
            violations.append((tail, "tail_residue"))
        if elements[-1] & 3 != 3:
            violations.append((elements[-1], "head_residue"))
        for e in elements:
            if e in owner:
                violations.append((e, "double_cover"))
            else:
                owner[e] = tail

    shards = [(lo, hi, max_steps) for lo, hi in split_range(2, bound, workers)]
    chains: list[tuple[int, ...]] = []
    for part in run_sharded(_chain_shard, shards, workers):
        for elements in part:
            if len(elements) == 1 and elements[0] & 3 != 3:
                violations.append((elements[0], "step_cap"))
                continue
            adopt(elements)
            chains.append(elements)
    report.strings_found = len(chains)

    # positions whose tail lies above the bound
    border: list[tuple[int, ...]] = []
    flagged = {p for p, _ in violations}
    for p in range(2, bound + 1):
        if p in owner:
            continue
        try:
            chain = string_of(p, max_steps)
        except StepCapExceededError:
            violations.append((p, "step_cap"))
            flagged.add(p)
            continue
        if chain.tail in owner:
            # tail already adopted yet p was unmarked: membership broke
            violations.append((p, "inconsistent"))
            flagged.add(p)
            continue
        border.append(chain.elements)
        adopt(chain.elements)
    report.border_chains = len(border)

    report.element_count = sum(1 for p in range(2, bound + 1) if p in owner)
    for p in range(2, bound + 1):
        if p not in owner and p not in flagged:
            violations.append((p, "uncovered"))

    # length statistics sample chains by head, the sampling the backward
    # geometric law quantifies over (every chain with head <= bound was
    # necessarily enumerated above)
    lengths = [len(c) for c in chains + border if c[-1] <= bound]
    report.length_histogram = _histogram(lengths)
    if lengths:
        report.mean_length = Fraction(sum(lengths), len(lengths))
    if bound <= KEEP_CHAINS_BOUND:
        all_chains = [StringChain(c) for c in chains] + [StringChain(c) for c in border]
        report.chains = sorted(all_chains, key=lambda c: c.tail)
    violations.sort()
    return report


def _histogram(lengths: list[int]) -> dict[int, int]:
    hist: dict[int, int] = {}
    for length in lengths:
        hist[length] = hist.get(length, 0) + 1
    return hist


def _stats_shard(args: tuple[int, int, int]) -> tuple[dict[int, int], int, list[tuple[int, str]]]:
    lo, hi, max_steps = args
    hist: dict[int, int] = {}
    total = 0
    bad: list[tuple[int, str]] = []
    first_head = lo + ((3 - lo) % 4)
    for h in range(first_head, hi + 1, 4):
        try:
            length = 1 + len(_walk_back(h, max_steps))
        except StepCapExceededError:
            bad.append((h, "step_cap"))
            continue
        hist[length] = hist.get(length, 0) + 1
        total += length
    return hist, total, bad


def string_stats(bound: int, max_steps: int = DEFAULT_MAX_STEPS,
                 workers: int = 1) -> PartitionReport:
    """Length statistics over every chain whose head is <= bound.

    Lighter than scan_strings: each head (position = 3 mod 4) identifies
    its chain uniquely and is walked backward once, so no cross-chain
    bookkeeping is kept.  Head sampling is the one the backward geometric
    law (continuation density 2/3, mean length 3) quantifies over.
    """
    if bound < 2:
        raise ValueError("bound must be >= 2")
    shards = [(lo, hi, max_steps) for lo, hi in split_range(2, bound, workers)]
    report = PartitionReport(scanned_bound=bound)
    hist: dict[int, int] = {}
    total = 0
    for part_hist, part_total, part_bad in run_sharded(_stats_shard, shards, workers):
        for length, count in part_hist.items():
            hist[length] = hist.get(length, 0) + count
        total += part_total
        report.violations.extend(part_bad)
    report.length_histogram = hist
    report.strings_found = sum(hist.values())
    report.element_count = total
    if report.strings_found:
        report.mean_length = Fraction(total, report.strings_found)
    report.violations.sort()
    return report


def continuation_ratios(histogram: dict[int, int], min_count: int = 1000) -> dict[int, float]:
    """Survival ratios count(len >= L+1)/count(len >= L) while counts stay large.

    A fresh chain keeps extending with density 2/3, so these ratios should
    hover near 2/3 until the sample thins out.
    """
    if not histogram:
        return {}
    max_len = max(histogram)
    at_least = [0] * (max_len + 2)
    for length, count in histogram.items():
        at_least[length] += count
    for length in range(max_len - 1, 0, -1):
        at_least[length] += at_least[length + 1]
    ratios = {}
    for length in range(1, max_len):
        if at_least[length] >= min_count and at_least[length + 1] > 0:
            ratios[length] = at_least[length + 1] / at_least[length]
    return ratios
