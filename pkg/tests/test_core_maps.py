import random

import pytest

from collatzkit import core
from collatzkit.errors import NotInDomainError


def test_collatz_step_values():
    assert core.collatz_step(1) == 4
    assert core.collatz_step(4) == 2
    assert core.collatz_step(2) == 1
    assert core.collatz_step(3) == 10


def test_collatz_trivial_cycle():
    # 4 -> 2 -> 1 -> 4 repeats
    n = 4
    seen = [n]
    for _ in range(3):
        n = core.collatz_step(n)
        seen.append(n)
    assert seen == [4, 2, 1, 4]


def test_accelerated_step_values():
    assert core.accelerated_step(1) == (1, 2)
    assert core.accelerated_step(3) == (5, 1)
    assert core.accelerated_step(199) == (299, 1)


def test_accelerated_step_rejects_even():
    with pytest.raises(ValueError):
        core.accelerated_step(4)


def test_accelerated_step_matches_repeated_halving():
    for n in range(1, 2001, 2):
        m = 3 * n + 1
        j = 0
        while m % 2 == 0:
            m //= 2
            j += 1
        assert core.accelerated_step(n) == (m, j)
        assert m % 2 == 1 and j >= 1


def test_enumeration_values():
    assert core.to_enum(5) == 3
    assert core.from_enum(1) == 1
    assert core.to_enum(299) == 150
    with pytest.raises(ValueError):
        core.to_enum(8)


def test_enumeration_roundtrip():
    for n in range(1, 999, 2):
        assert core.from_enum(core.to_enum(n)) == n
    for x in range(1, 500):
        assert core.to_enum(core.from_enum(x)) == x


def test_conjugate_step_values():
    assert core.conjugate_step(2) == 3
    assert core.conjugate_step(1) == 1   # the trivial loop
    assert core.conjugate_step(7) == 3   # equivalents share the image


def test_conjugacy_identity_range():
    for x in range(1, 20000):
        n, _ = core.accelerated_step(core.from_enum(x))
        assert core.conjugate_step(x) == core.to_enum(n)


def test_conjugacy_scan_report():
    report = core.conjugacy_scan(1, 50000)
    assert report["checked"] == 50000
    assert report["mismatch_count"] == 0
    assert core.conjugacy_scan(1, 50000, workers=4) == report


def test_equivalent_pow_values():
    assert core.equivalent_pow(1, 1) == 3
    assert core.equivalent_pow(6, 5) == 5803
    assert core.equivalent_pow(9, 0) == 9


def test_equivalence_law_sample():
    rng = random.Random(7)
    for _ in range(300):
        x = rng.randrange(1, 10**5)
        for k in range(0, 8):
            assert core.conjugate_step(core.equivalent_pow(x, k)) == core.conjugate_step(x)


def test_equivalents_are_heads():
    for x in range(1, 200):
        for k in range(1, 5):
            assert core.equivalent_pow(x, k) & 3 == 3


def test_strip_equivalents_values():
    assert core.strip_equivalents(7) == (2, 1)
    assert core.strip_equivalents(5803) == (6, 5)
    assert core.strip_equivalents(4) == (4, 0)


def test_strip_roundtrip_and_maximality():
    for x in range(1, 5000):
        base, depth = core.strip_equivalents(x)
        assert base & 3 != 3
        assert core.equivalent_pow(base, depth) == x


def test_interval_class_values():
    assert core.interval_class(2) == 1
    assert core.interval_class(7) == 3
    assert core.interval_class(3) == 4
    assert core.interval_class(5) == 2   # 5 = 1 + 4*1


def test_interval_class_residue_law():
    # members of class z form a single residue class mod 2^z: every window
    # of 2^z consecutive positions holds exactly one
    for z in range(1, 11):
        window = 2 ** z
        members = [x for x in range(1, 4 * window + 1) if core.interval_class(x) == z]
        assert len(members) == 4
        assert all(b - a == window for a, b in zip(members, members[1:]))


def test_interval_class_from_strip():
    for x in range(1, 3000):
        base, depth = core.strip_equivalents(x)
        expected = 2 * depth + 1 if base % 2 == 0 else 2 * depth + 2
        assert core.interval_class(x) == expected


def test_residue_mod3():
    assert core.residue_mod3(9) == 0
    assert core.residue_mod3(7) == 1
    assert core.residue_mod3(2) == 2


def test_chain_next_values():
    assert core.chain_next(4) == 6
    assert core.chain_next(9) == 7
    with pytest.raises(NotInDomainError):
        core.chain_next(11)


def test_chain_prev_values():
    assert core.chain_prev(5803) == (7737, 2)
    assert core.chain_prev(7737) == (5158, 1)
    with pytest.raises(NotInDomainError):
        core.chain_prev(2)


def test_chain_prev_is_right_inverse():
    for x in range(1, 5000):
        if x % 3 == 2:
            continue
        pre, branch = core.chain_prev(x)
        assert core.chain_next(pre) == x
        assert branch == (1 if x % 3 == 0 else 2)


def test_partial_map_complementarity():
    # exactly one of: chain_next defined, or x is a head
    for x in range(1, 2000):
        is_head = x & 3 == 3
        try:
            core.chain_next(x)
            defined = True
        except NotInDomainError:
            defined = False
        assert defined != is_head


def test_image_range_law():
    for x in range(1, 20000):
        assert core.conjugate_step(x) % 3 != 2


def test_chain_next_agrees_with_conjugate_step():
    # on its domain the one-to-one step is the full map
    for x in range(2, 5000):
        if x & 3 != 3:
            assert core.chain_next(x) == core.conjugate_step(x)


def test_classify_roles():
    assert core.classify(1).role == "trivial_loop"
    assert core.classify(2).role == "tail"       # 2 = 2 mod 3
    assert core.classify(11).role == "tail_and_head"
    assert core.classify(7).role == "head"
    assert core.classify(4).role == "interior"


def test_classify_payload():
    payload = core.classify(2).as_payload()
    assert payload == {"x": 2, "F": 3, "y": 2, "z": 1, "equiv_depth": 0, "role": "tail"}


def test_no_silent_overflow_at_depth():
    # quadrupling per equivalent blows through 64 bits near depth 30
    deep = core.equivalent_pow(6, 60)
    assert deep.bit_length() > 120
    base, depth = core.strip_equivalents(deep)
    assert (base, depth) == (6, 60)
    assert core.conjugate_step(deep) == core.conjugate_step(6)
