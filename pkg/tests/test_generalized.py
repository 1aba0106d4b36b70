import pytest

from collatzkit import generalized as gen
from collatzkit.core import accelerated_step


def test_step_values():
    assert gen.generalized_step(7, 1) == (11, 1)
    assert gen.generalized_step(1, 5) == (1, 3)     # 8/8, a fixed point
    assert gen.generalized_step(19, 5) == (31, 1)


def test_step_validation():
    with pytest.raises(ValueError):
        gen.generalized_step(4, 1)
    for bad_p in (0, 2, 3, 9, 15, -5):
        with pytest.raises(ValueError):
            gen.check_addend(bad_p)
    for good_p in (1, 5, 7, 11, 13, 17):
        assert gen.check_addend(good_p) == good_p


def test_p1_reduces_to_accelerated_step():
    for n in range(1, 5001, 2):
        assert gen.generalized_step(n, 1) == accelerated_step(n)


def test_trajectory_to_trivial_cycle():
    t = gen.trajectory(3, 1)
    assert t.path[:3] == [3, 5, 1]
    assert t.outcome == gen.OUTCOME_CYCLE
    assert t.cycle.members == (1,)


def test_trajectory_fixed_point_p5():
    t = gen.trajectory(5, 5)
    assert t.cycle.members == (5,)


def test_trajectory_cap():
    t = gen.trajectory(9, 5, max_steps=1)
    assert t.outcome == gen.OUTCOME_CAP and t.cycle is None


def test_trajectory_reaches_cataloged_cycle():
    catalog = gen.cycle_search(5, 10000)
    canonicals = {c.canonical for c in catalog.cycles}
    t = gen.trajectory(9, 5)
    assert t.outcome == gen.OUTCOME_CYCLE
    assert t.cycle.canonical in canonicals


def test_cycle_search_p1():
    catalog = gen.cycle_search(1, 10000)
    assert [c.members for c in catalog.cycles] == [(1,)]
    assert not catalog.cap_exceeded_seeds


def test_cycle_search_p5():
    catalog = gen.cycle_search(5, 10000)
    by_canonical = {c.canonical: c for c in catalog.cycles}
    assert by_canonical[1].members == (1,)
    assert by_canonical[5].members == (5,)
    assert by_canonical[19].members == (19, 31, 49)


def cycle_closure_ok(p, record):
    # stepping each member must permute the member set cyclically
    nxts = sorted(gen.generalized_step(m, p)[0] for m in record.members)
    return nxts == sorted(record.members)


@pytest.mark.parametrize("p", [5, 7, 11])
def test_cycle_invariants(p):
    catalog = gen.cycle_search(p, 3000)
    seen: set[int] = set()
    for record in catalog.cycles:
        assert record.members == tuple(sorted(record.members))
        assert record.canonical == record.members[0]
        assert cycle_closure_ok(p, record)
        assert not (seen & set(record.members))
        seen.update(record.members)
