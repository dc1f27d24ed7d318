import random

import pytest

from pcsm.brute import brute_optimum, brute_pareto
from pcsm.core import LinearOracle, make_instance, mask_to_tuple

from conftest import FAMILIES, naive_best, naive_signatures, random_instance


def test_empty_ground_set():
    inst = make_instance([], [], [], [], LinearOracle([]))
    res = brute_optimum(inst)
    assert res.feasible_count == 1
    assert res.best_set == 0
    assert res.best_value == 0


def test_unconstrained_linear_takes_everything():
    n = 5
    inst = make_instance([[1] * n], [], [n], [], LinearOracle([1, 2, 3, 4, 5]))
    res = brute_optimum(inst)
    assert res.best_set == (1 << n) - 1
    assert res.best_value == 15


def test_refuses_large_n():
    inst = make_instance([], [], [], [], LinearOracle([1] * 23))
    with pytest.raises(ValueError):
        brute_optimum(inst)


@pytest.mark.parametrize("family", FAMILIES)
def test_against_double_enumeration(family):
    rng = random.Random(FAMILIES.index(family) + 10)
    for _ in range(12):
        inst = random_instance(rng, rng.randint(1, 10), p=rng.randint(0, 2),
                               c=rng.randint(0, 2), family=family)
        res = brute_optimum(inst)
        want_val, want_sub, want_count = naive_best(inst)
        assert res.feasible_count == want_count
        if want_count:
            assert res.best_value == want_val
            assert mask_to_tuple(res.best_set) == want_sub


def test_infeasible_instance_reported():
    inst = make_instance([], [[1, 1]], [], [5], LinearOracle([1, 1]))
    res = brute_optimum(inst)
    assert res.feasible_count == 0


def test_pareto_single_element():
    inst = make_instance([[2]], [[3]], [2], [0], LinearOracle([4]))
    table = brute_pareto(inst)
    assert set(table) == {((0,), (0,)), ((3,), (2,))}


def test_pareto_two_distinct_elements():
    inst = make_instance([[1, 2]], [[3, 5]], [3], [0], LinearOracle([1, 2]))
    table = brute_pareto(inst)
    assert len(table) == 4


def test_pareto_matches_double_enumeration():
    rng = random.Random(77)
    for _ in range(8):
        inst = random_instance(rng, 10, p=1, c=1,
                               family=FAMILIES[rng.randrange(3)])
        table = brute_pareto(inst)
        want = naive_signatures(inst)
        assert len(table) == len(want)
        for key, (value, mask) in table.items():
            assert want[key] == value
            cov, pak = key
            assert inst.cover_value(mask) == cov
            assert inst.pack_value(mask) == pak


def test_brute_dominates_any_feasible_set():
    rng = random.Random(30)
    inst = random_instance(rng, 9, p=1, c=1, family="coverage")
    res = brute_optimum(inst)
    for mask in range(1 << 9):
        loads_p = inst.pack_value(mask)
        loads_c = inst.cover_value(mask)
        ok = (all(l <= b for l, b in zip(loads_p, inst.pack_bound))
              and all(l >= b for l, b in zip(loads_c, inst.cover_bound)))
        if ok:
            assert inst.objective.eval(mask) <= res.best_value
