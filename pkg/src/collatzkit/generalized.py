"""The 3n+p family on odd integers: accelerated steps, trajectories, cycles.

p must be odd and congruent to 1 or 5 mod 6 (that is, not a multiple of 3).
Everything here stays in direct odd-integer space; no enumerated-space form
of these maps is provided.
"""

from __future__ import annotations

from dataclasses import dataclass

VISITED_LIMIT = 1 << 20  # switch from a visited dict to Brent's method past this


def check_addend(p: int) -> int:
    """Validate the additive constant: odd, positive, p mod 6 in {1, 5}."""
    if p < 1 or p % 2 == 0 or p % 6 not in (1, 5):
        raise ValueError(f"p must be odd with p mod 6 in {{1, 5}}, got {p}")
    return p


def generalized_step(n: int, p: int) -> tuple[int, int]:
    """Odd-to-odd step for 3n+p: return ((3n+p)/2^j, j) with j maximal."""
    check_addend(p)
    if n < 1 or n % 2 == 0:
        raise ValueError("generalized step needs an odd n >= 1")
    m = 3 * n + p
    j = (m & -m).bit_length() - 1
    return m >> j, j


@dataclass(frozen=True)
class CycleRecord:
    """An accelerated-map cycle, stored sorted with its minimum as canonical."""

    members: tuple[int, ...]

    @property
    def canonical(self) -> int:
        return self.members[0]

    def __len__(self) -> int:
        return len(self.members)

    def as_payload(self) -> dict:
        return {
            "canonical": self.canonical,
            "length": len(self.members),
            "members": list(self.members),
        }


def _cycle_from(start: int, p: int) -> CycleRecord:
    members = [start]
    cur, _ = generalized_step(start, p)
    while cur != start:
        members.append(cur)
        cur, _ = generalized_step(cur, p)
    return CycleRecord(tuple(sorted(members)))


OUTCOME_CYCLE = "entered_cycle"
OUTCOME_CAP = "cap_exceeded"


@dataclass
class Trajectory:
    seed: int
    path: list[int]
    outcome: str
    cycle: CycleRecord | None


def trajectory(n: int, p: int, max_steps: int = 1_000_000) -> Trajectory:
    """Iterate the accelerated 3n+p step from n until a cycle closes or the cap hits.

    Uses a visited map for the first ~10^6 values, then Brent's constant-
    memory detection for pathologically long runs.
    """
    check_addend(p)
    if n < 1 or n % 2 == 0:
        raise ValueError("trajectory needs an odd seed")
    path = [n]
    seen = {n: 0}
    cur = n
    for _ in range(min(max_steps, VISITED_LIMIT)):
        cur, _ = generalized_step(cur, p)
        if cur in seen:
            start = cur
            return Trajectory(seed=n, path=path, outcome=OUTCOME_CYCLE,
                              cycle=_cycle_from(start, p))
        seen[cur] = len(path)
        path.append(cur)
    if max_steps <= VISITED_LIMIT:
        return Trajectory(seed=n, path=path, outcome=OUTCOME_CAP, cycle=None)
    # Brent: look for a power-of-two window containing a repeat
    remaining = max_steps - VISITED_LIMIT
    anchor = cur
    power = lam = 1
    probe = cur
    for _ in range(remaining):
        probe, _ = generalized_step(probe, p)
        if probe == anchor:
            return Trajectory(seed=n, path=path, outcome=OUTCOME_CYCLE,
                              cycle=_cycle_from(anchor, p))
        if lam == power:
            anchor = probe
            power <<= 1
            lam = 0
        lam += 1
    return Trajectory(seed=n, path=path, outcome=OUTCOME_CAP, cycle=None)


@dataclass
class CycleCatalog:
    p: int
    bound: int
    cycles: list[CycleRecord]
    cap_exceeded_seeds: list[int]

    def as_payload(self) -> dict:
        return {
            "p": self.p,
            "bound": self.bound,
            "cycles": [c.as_payload() for c in self.cycles],
            "cap_exceeded_seeds": self.cap_exceeded_seeds[:100],
            "cap_exceeded_count": len(self.cap_exceeded_seeds),
        }


def cycle_search(p: int, bound: int, max_steps: int = 1_000_000) -> CycleCatalog:
    """Every accelerated 3n+p cycle whose minimum member is <= bound.

    Runs the trajectory of each odd seed up to the bound, deduplicating by
    canonical member; trajectories already known to land in a found cycle
    stop as soon as they touch one.
    """
    check_addend(p)
    if bound < 1:
        raise ValueError("bound must be >= 1")
    cycles: dict[int, CycleRecord] = {}
    on_cycle: set[int] = set()
    resolved: set[int] = set()
    caps: list[int] = []
    for seed in range(1, bound + 1, 2):
        if seed in resolved:
            continue
        cur = seed
        path: list[int] = []
        seen: set[int] = set()
        capped = False
        while cur not in on_cycle and cur not in resolved:
            if cur in seen:
                rec = _cycle_from(cur, p)
                cycles[rec.canonical] = rec
                on_cycle.update(rec.members)
                break
            seen.add(cur)
            path.append(cur)
            if len(path) > max_steps:
                caps.append(seed)
                capped = True
                break
            cur, _ = generalized_step(cur, p)
        if capped:
            continue  # nothing on a capped run is known to resolve
        for v in path:
            if v <= bound:
                resolved.add(v)
    found = [cycles[c] for c in sorted(cycles) if c <= bound]
    return CycleCatalog(p=p, bound=bound, cycles=found, cap_exceeded_seeds=caps)
