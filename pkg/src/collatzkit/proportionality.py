"""Mapping signatures and their exactly-one-per-window recurrence laws.

A forward signature lists the interval classes of successive conjugate
steps; its realizations recur mod 2^(sum of classes).  A reverse signature
lists (equivalents taken, backward branch) pairs; its realizations recur
mod 3^n where n is the number of backward steps.  Both laws are verified by
direct realization at every position of a range - the exhaustive window
scan is its own oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import conjugate_step, equivalent_pow, interval_class
from .errors import InsufficientRangeError, TrivialLoopError

DEFAULT_MAX_REVERSE_LEN = 6


@dataclass(frozen=True)
class ForwardSignature:
    """Interval classes along consecutive forward steps; window 2^sum."""

    classes: tuple[int, ...]

    def __post_init__(self):
        if not self.classes or any(z < 1 for z in self.classes):
            raise ValueError("forward signature needs entries >= 1")

    @property
    def modulus(self) -> int:
        return 1 << sum(self.classes)

    def text(self) -> str:
        return "z:" + ",".join(str(z) for z in self.classes)


@dataclass(frozen=True)
class ReverseSignature:
    """(equivalents, branch) pairs for backward steps; window 3^len."""

    steps: tuple[tuple[int, int], ...]

    def __post_init__(self):
        for e, b in self.steps:
            if e < 0 or b not in (1, 2):
                raise ValueError("reverse signature needs equivalents >= 0 and branch in {1,2}")
        if not self.steps:
            raise ValueError("reverse signature needs at least one step")

    @property
    def modulus(self) -> int:
        return 3 ** len(self.steps)

    def text(self) -> str:
        return "y:" + ",".join(f"{e}.{b}" for e, b in self.steps)


Signature = ForwardSignature | ReverseSignature


def parse_signature(text: str) -> Signature:
    """Parse the compact literals "z:1,4" and "y:0.2,0.1,5.2,0.1"."""
    kind, _, body = text.partition(":")
    if not body:
        raise ValueError(f"bad signature literal {text!r}")
    try:
        if kind == "z":
            return ForwardSignature(tuple(int(p) for p in body.split(",")))
        if kind == "y":
            steps = []
            for part in body.split(","):
                e, _, b = part.partition(".")
                steps.append((int(e), int(b)))
            return ReverseSignature(tuple(steps))
    except ValueError as exc:
        raise ValueError(f"bad signature literal {text!r}: {exc}") from None
    raise ValueError(f"unknown signature kind {kind!r} (expected y or z)")


def forward_signature_of(x: int, steps: int) -> ForwardSignature:
    """Record the interval classes of x, step(x), ... for `steps` steps."""
    if x == 1:
        raise TrivialLoopError("position 1 loops; its forward signature is degenerate")
    if x < 2 or steps < 1:
        raise ValueError("need x >= 2 and steps >= 1")
    classes = []
    cur = x
    for _ in range(steps):
        classes.append(interval_class(cur))
        cur = conjugate_step(cur)
    return ForwardSignature(tuple(classes))


def realizes_forward(x: int, sig: ForwardSignature) -> bool:
    """True when x is carried through exactly the signature's interval classes."""
    cur = x
    for z in sig.classes:
        if interval_class(cur) != z:
            return False
        cur = conjugate_step(cur)
    return True


@dataclass(frozen=True)
class Realization:
    final: int
    ok: bool


def realize_reverse_signature(x: int, sig: ReverseSignature) -> Realization:
    """Apply each (equivalents, branch) pair backward starting from x.

    Each step takes the stated number of higher equivalents and then pulls
    back through the stated branch; a residue mismatch stops the walk with
    ok=False (mismatch is data, not an error).
    """
    if x < 1:
        raise ValueError("positions start at 1")
    cur = x
    for e, b in sig.steps:
        cur = equivalent_pow(cur, e)
        r = cur % 3
        if b == 1:
            if r != 0:
                return Realization(cur, False)
            cur = (2 * cur) // 3
        else:
            if r != 1:
                return Realization(cur, False)
            cur = (4 * cur - 1) // 3
    return Realization(cur, True)


def minimal_reverse_signature(x: int, n: int) -> ReverseSignature:
    """The unique length-n reverse signature taking equivalents only when forced.

    Residues 0 and 1 pull straight back (branches 1 and 2); residue 2 takes
    a single equivalent first, which lands on residue 1.  Every position
    realizes exactly one such signature.
    """
    if x < 1 or n < 1:
        raise ValueError("need x >= 1 and n >= 1")
    steps = []
    cur = x
    for _ in range(n):
        r = cur % 3
        if r == 2:
            cur = 4 * cur - 1
            r = cur % 3
            e = 1
        else:
            e = 0
        if r == 0:
            steps.append((e, 1))
            cur = (2 * cur) // 3
        else:
            steps.append((e, 2))
            cur = (4 * cur - 1) // 3
    return ReverseSignature(tuple(steps))


def _realizes(x: int, sig: Signature) -> bool:
    if isinstance(sig, ForwardSignature):
        return realizes_forward(x, sig)
    return realize_reverse_signature(x, sig).ok


@dataclass
class RecurrenceReport:
    """Verdict of an exhaustive window scan for one signature."""

    signature: str
    modulus: int
    lo: int
    hi: int
    occurrences: list[int]
    verdict: str                    # "pass" or "fail"
    first_violation: int | None = None

    @property
    def ok(self) -> bool:
        return self.verdict == "pass"

    def as_payload(self) -> dict:
        payload = {
            "signature": self.signature,
            "modulus": self.modulus,
            "lo": self.lo,
            "hi": self.hi,
            "occurrence_count": len(self.occurrences),
            "verdict": self.verdict,
            "first_violation": self.first_violation,
        }
        if self.occurrences:
            payload["first_occurrence"] = self.occurrences[0]
            payload["last_occurrence"] = self.occurrences[-1]
        if len(self.occurrences) <= 200:
            payload["occurrences"] = list(self.occurrences)
        return payload


def verify_recurrence(sig: Signature, lo: int, hi: int) -> RecurrenceReport:
    """Scan [lo..hi] and check the exactly-one-per-window law for sig.

    Passes when realizations form an arithmetic progression with the
    signature's modulus as gap and no window of `modulus` consecutive
    positions inside the range misses or doubles an occurrence; this also
    pins the "occurs at but not before" minimality.
    """
    m = sig.modulus
    if hi - lo < 2 * m:
        raise InsufficientRangeError(
            f"range [{lo}..{hi}] holds fewer than two windows of {m}")
    if lo < 1:
        raise ValueError("positions start at 1")
    occurrences = [x for x in range(lo, hi + 1) if _realizes(x, sig)]
    verdict, violation = "pass", None
    if not occurrences:
        verdict, violation = "fail", lo
    else:
        if occurrences[0] - lo >= m:
            verdict, violation = "fail", lo
        for a, b in zip(occurrences, occurrences[1:]):
            if b - a != m:
                verdict, violation = "fail", (min(b, a + m) if b - a > m else b)
                break
        if verdict == "pass" and hi - occurrences[-1] >= m:
            verdict, violation = "fail", occurrences[-1] + m
    return RecurrenceReport(signature=sig.text(), modulus=m, lo=lo, hi=hi,
                            occurrences=occurrences, verdict=verdict,
                            first_violation=violation)


GENERATORS = ("all", "heads", "equiv")


def _generate_positions(generator: str, count: int, x: int | None) -> list[int]:
    if generator == "all":
        return list(range(1, count + 1))
    if generator == "heads":
        return [4 * i - 1 for i in range(1, count + 1)]
    if generator == "equiv":
        if x is None or x < 1:
            raise ValueError("equiv generator needs a base position x >= 1")
        out = []
        cur = x
        for _ in range(count):
            out.append(cur)
            cur = 4 * cur - 1
        return out
    raise ValueError(f"unknown generator {generator!r} (expected one of {GENERATORS})")


@dataclass
class SetRecurrenceReport:
    """Window verdict for every minimal signature seen in a set's first window."""

    generator: str
    n: int
    windows: int
    base: int | None
    signatures_checked: int
    verdict: str
    first_violation: tuple[str, int] | None = None   # (signature text, window index)

    @property
    def ok(self) -> bool:
        return self.verdict == "pass"

    def as_payload(self) -> dict:
        return {
            "generator": self.generator,
            "n": self.n,
            "windows": self.windows,
            "base": self.base,
            "signatures_checked": self.signatures_checked,
            "verdict": self.verdict,
            "first_violation": (
                {"signature": self.first_violation[0], "window": self.first_violation[1]}
                if self.first_violation else None),
        }


def verify_proportional_set(generator: str, n: int, windows: int,
                            x: int | None = None,
                            max_n: int = DEFAULT_MAX_REVERSE_LEN) -> SetRecurrenceReport:
    """Check that a generated subset keeps the reverse recurrence law.

    Enumerates the set's first `windows` blocks of 3^n consecutive elements,
    derives the minimal reverse signature of every element in the first
    block, and requires each signature to be realized exactly once per
    block.  Supported generators: "all" (every position), "heads"
    (positions 3, 7, 11, ...), "equiv" (x and its higher equivalents).
    """
    if n < 1 or n > max_n:
        raise ValueError(f"need 1 <= n <= {max_n}")
    if windows < 2:
        raise InsufficientRangeError("need at least two windows")
    window = 3 ** n
    elems = _generate_positions(generator, windows * window, x)
    sigs = []
    seen = set()
    for e in elems[:window]:
        sig = minimal_reverse_signature(e, n)
        if sig.steps not in seen:
            seen.add(sig.steps)
            sigs.append(sig)
    verdict, violation = "pass", None
    for sig in sigs:
        for w in range(windows):
            block = elems[w * window:(w + 1) * window]
            hits = sum(1 for e in block if realize_reverse_signature(e, sig).ok)
            if hits != 1:
                verdict, violation = "fail", (sig.text(), w)
                break
        if violation:
            break
    return SetRecurrenceReport(generator=generator, n=n, windows=windows,
                               base=x if generator == "equiv" else None,
                               signatures_checked=len(sigs), verdict=verdict,
                               first_violation=violation)
