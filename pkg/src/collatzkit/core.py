"""Exact maps on odd integers and their enumerated-space conjugates.

Direct space is the odd positive integers.  Enumerated space replaces each
odd n by the position x = (n+1)/2, so position arithmetic stays dense.  All
functions here are pure, allocation-light, and safe to call from worker
processes; Python ints give exact arbitrary-precision arithmetic with no
silent wraparound.

Vocabulary used throughout the package:

* accelerated step: odd n -> (3n+1)/2^j with 2^j the largest power of two
  dividing 3n+1.
* conjugate step: the same map transported to enumerated positions.
* higher equivalent of x: 4x-1.  Equivalents share a conjugate image, so
  stripping them (inverting 4x-1 while x = 3 mod 4) yields the unique base
  position that is not itself an equivalent.
* chain step: the one-to-one restriction of the conjugate map to positions
  without lower equivalents (x != 3 mod 4); its inverse exists exactly for
  positions not = 2 mod 3.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import NotInDomainError
from .sharding import run_sharded, split_range


def collatz_step(n: int) -> int:
    """Classic step: halve even n, send odd n to 3n+1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return n // 2 if n % 2 == 0 else 3 * n + 1


def accelerated_step(n: int) -> tuple[int, int]:
    """Odd-to-odd step: return ((3n+1)/2^j, j) with j maximal.

    The count j is kept because scan statistics and the conjugacy oracle
    need it; j >= 1 always since 3n+1 is even for odd n.
    """
    if n < 1 or n % 2 == 0:
        raise ValueError("accelerated step needs an odd n >= 1")
    m = 3 * n + 1
    j = (m & -m).bit_length() - 1
    return m >> j, j


def to_enum(n: int) -> int:
    """Enumerate an odd integer: n -> (n+1)/2."""
    if n < 1 or n % 2 == 0:
        raise ValueError("only odd integers are enumerated")
    return (n + 1) // 2


def from_enum(x: int) -> int:
    """Inverse enumeration: position x -> odd integer 2x-1."""
    if x < 1:
        raise ValueError("positions start at 1")
    return 2 * x - 1


def higher_equivalent(x: int) -> int:
    """First higher equivalent of a position: x -> 4x-1."""
    return 4 * x - 1


def equivalent_pow(x: int, k: int) -> int:
    """Apply the higher-equivalent map k times (k = 0 returns x)."""
    if x < 1 or k < 0:
        raise ValueError("need x >= 1 and k >= 0")
    for _ in range(k):
        x = 4 * x - 1
    return x


def strip_equivalents(x: int) -> tuple[int, int]:
    """Peel lower equivalents off x: return (base, depth).

    base is the unique position with base != 3 (mod 4) such that applying
    the higher-equivalent map depth times to base gives back x.
    """
    if x < 1:
        raise ValueError("positions start at 1")
    depth = 0
    while x & 3 == 3:
        x = (x + 1) >> 2
        depth += 1
    return x, depth


def conjugate_step(x: int) -> int:
    """Image of a position under the accelerated map in enumerated space.

    Computed directly: strip equivalents to the base b, then map an even
    base 2+2m to 3+3m and a base 1+4m to 1+3m.  Never returns a position
    = 2 (mod 3); position 1 is the fixed point of the map.
    """
    b, _ = strip_equivalents(x)
    return (3 * b) >> 1 if b % 2 == 0 else (3 * b + 1) >> 2


def residue_mod3(x: int) -> int:
    """Residue of a position mod 3; residue 2 means no chain pre-image."""
    if x < 1:
        raise ValueError("positions start at 1")
    return x % 3


def interval_class(x: int) -> int:
    """Index z of the residue class whose members recur every 2^z positions.

    With (base, d) = strip_equivalents(x): z = 2d+1 for even base and
    z = 2d+2 for base = 1 (mod 4).  Classes z = 1, 2, 3, 4, ... are the
    residue classes 2+2m, 1+4m, 7+8m, 3+16m, ... of moduli 2^z.
    """
    b, d = strip_equivalents(x)
    return 2 * d + 1 if b % 2 == 0 else 2 * d + 2


def chain_next(x: int) -> int:
    """One-to-one forward step: 2+2m -> 3+3m, 1+4m -> 1+3m.

    Positions = 3 (mod 4) are chain heads and have no forward step here;
    they are only reachable through equivalents.
    """
    if x & 3 == 3:
        raise NotInDomainError(f"position {x} is a chain head (3 mod 4)")
    if x < 1:
        raise ValueError("positions start at 1")
    return (3 * x) >> 1 if x % 2 == 0 else (3 * x + 1) >> 2


def chain_prev(x: int) -> tuple[int, int]:
    """One-to-one backward step: return (pre_image, branch).

    Residue 0 mod 3 pulls back through branch 1 (3m+3 -> 2m+2), residue 1
    through branch 2 (3m+1 -> 4m+1); residue 2 has no pre-image.
    """
    r = x % 3
    if r == 2:
        raise NotInDomainError(f"position {x} = 2 (mod 3) has no chain pre-image")
    if x < 1:
        raise ValueError("positions start at 1")
    if r == 0:
        return (2 * x) // 3, 1
    return (4 * x - 1) // 3, 2


ROLE_TRIVIAL_LOOP = "trivial_loop"
ROLE_TAIL = "tail"
ROLE_HEAD = "head"
ROLE_TAIL_AND_HEAD = "tail_and_head"
ROLE_INTERIOR = "interior"


@dataclass(frozen=True)
class Classification:
    """Residue/role summary of one position."""

    x: int
    image: int
    residue: int       # mod-3 residue selecting the backward branch
    interval: int      # recurrence exponent z (members recur every 2^z)
    equiv_depth: int   # number of lower equivalents
    role: str

    def as_payload(self) -> dict:
        return {
            "x": self.x,
            "F": self.image,
            "y": self.residue,
            "z": self.interval,
            "equiv_depth": self.equiv_depth,
            "role": self.role,
        }


def classify(x: int) -> Classification:
    """Classify a position: image, residues, equivalent depth, chain role."""
    if x < 1:
        raise ValueError("positions start at 1")
    _, depth = strip_equivalents(x)
    y = x % 3
    z = interval_class(x)
    if x == 1:
        role = ROLE_TRIVIAL_LOOP
    else:
        is_head = x & 3 == 3
        is_tail = y == 2
        if is_head and is_tail:
            role = ROLE_TAIL_AND_HEAD
        elif is_head:
            role = ROLE_HEAD
        elif is_tail:
            role = ROLE_TAIL
        else:
            role = ROLE_INTERIOR
    return Classification(x=x, image=conjugate_step(x), residue=y,
                          interval=z, equiv_depth=depth, role=role)


def _conjugacy_shard(span: tuple[int, int]) -> tuple[int, list[int]]:
    lo, hi = span
    mismatches = []
    for x in range(lo, hi + 1):
        # direct route: enumerate(accelerated(2x-1))
        m = 6 * x - 2  # 3*(2x-1)+1
        j = (m & -m).bit_length() - 1
        direct = ((m >> j) + 1) >> 1
        # enumerated route: strip equivalents, affine step
        b = x
        while b & 3 == 3:
            b = (b + 1) >> 2
        conj = (3 * b) >> 1 if b % 2 == 0 else (3 * b + 1) >> 2
        if conj != direct:
            mismatches.append(x)
    return hi - lo + 1, mismatches


def conjugacy_scan(lo: int, hi: int, workers: int = 1) -> dict:
    """Check conjugate_step(x) == to_enum(accelerated_step(from_enum(x))) on [lo..hi].

    The two routes are computed independently (direct odd arithmetic vs
    equivalent-stripping); the report is deterministic and identical for
    any worker count.
    """
    if not 1 <= lo <= hi:
        raise ValueError("need 1 <= lo <= hi")
    shards = split_range(lo, hi, workers)
    results = run_sharded(_conjugacy_shard, shards, workers)
    checked = sum(r[0] for r in results)
    mismatches = sorted(m for r in results for m in r[1])
    return {
        "lo": lo,
        "hi": hi,
        "checked": checked,
        "mismatch_count": len(mismatches),
        "mismatches": mismatches[:100],
    }
