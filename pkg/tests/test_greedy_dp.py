import random
from fractions import Fraction

import pytest

from pcsm.brute import brute_optimum, brute_pareto
from pcsm.core import (
    BudgetExceededError,
    LinearOracle,
    make_instance,
    mask_of,
    mask_to_tuple,
    violation_profile,
)
from pcsm.greedy_dp import dp_with_completion, scale_instance, vanilla_dp

from conftest import FAMILIES, random_instance


def test_single_element_instance():
    inst = make_instance([[1]], [[1]], [1], [1], LinearOracle([5]))
    res = vanilla_dp(inst)
    assert res.found
    assert res.best_set == mask_of([0])
    assert res.best_value == 5


def test_warmup_floor_against_brute():
    rng = random.Random(2024)
    for trial in range(40):
        inst = random_instance(rng, rng.randint(4, 10), p=1, c=1,
                               family=FAMILIES[trial % 3])
        br = brute_optimum(inst)
        if not br.feasible_count:
            continue
        res = vanilla_dp(inst)
        assert res.found
        assert 4 * res.best_value >= br.best_value
        cov = inst.cover_value(res.best_set)
        pak = inst.pack_value(res.best_set)
        assert all(2 * v >= b for v, b in zip(cov, inst.cover_bound))
        assert all(v <= b for v, b in zip(pak, inst.pack_bound))


def test_two_constraint_rows():
    rng = random.Random(8)
    for _ in range(10):
        inst = random_instance(rng, 7, p=2, c=2, max_entry=4)
        br = brute_optimum(inst)
        res = vanilla_dp(inst)
        if br.feasible_count:
            assert res.found
            assert 4 * res.best_value >= br.best_value


def test_deterministic_replay():
    rng = random.Random(12)
    inst = random_instance(rng, 8, p=1, c=1, family="coverage")
    a = vanilla_dp(inst)
    b = vanilla_dp(inst)
    assert repr(sorted(a.table.items())) == repr(sorted(b.table.items()))
    assert a.best_set == b.best_set and a.best_value == b.best_value


def test_cell_exactness_with_exact_keys():
    rng = random.Random(13)
    inst = random_instance(rng, 7, p=1, c=1)
    res = vanilla_dp(inst, saturate_cover=False)
    for (q, cov, pak), (mask, value) in res.table.items():
        assert bin(mask).count("1") == q
        assert inst.cover_value(mask) == cov
        assert inst.pack_value(mask) == pak
        assert inst.objective.eval(mask) == value


def test_pareto_dominates_cells():
    rng = random.Random(14)
    for _ in range(6):
        inst = random_instance(rng, 8, p=1, c=1, family="coverage")
        res = vanilla_dp(inst, saturate_cover=False)
        pareto = brute_pareto(inst)
        for (q, cov, pak), (mask, value) in res.table.items():
            assert pareto[(cov, pak)][0] >= value


def test_subset_value_dominates_permutation_marginals():
    # for any subset S of an optimal solution O with marginals taken along a
    # fixed permutation, f(S) >= sum of the marginals of S's elements
    rng = random.Random(55)
    for trial in range(25):
        inst = random_instance(rng, 8, p=1, c=1, family=FAMILIES[trial % 3])
        br = brute_optimum(inst)
        if not br.feasible_count:
            continue
        opt = list(mask_to_tuple(br.best_set))
        if not opt:
            continue
        rng.shuffle(opt)
        oracle = inst.objective
        g = {}
        prefix = 0
        for o in opt:
            g[o] = oracle.eval(prefix | (1 << o)) - oracle.eval(prefix)
            prefix |= 1 << o
        for _ in range(10):
            sub = [o for o in opt if rng.random() < 0.5]
            assert oracle.eval(mask_of(sub)) >= sum(g[o] for o in sub)


def test_completion_empty_set_feasible():
    inst = make_instance([[1, 1]], [[1, 1]], [2], [0], LinearOracle([3, 4]))
    res = dp_with_completion(inst)
    assert res.found
    assert all(v >= b for v, b in zip(res.cover_with_multiplicity, inst.cover_bound))


def test_completion_multiset_bounds():
    rng = random.Random(31)
    for trial in range(25):
        inst = random_instance(rng, rng.randint(3, 9), p=1, c=1,
                               family=FAMILIES[trial % 3])
        br = brute_optimum(inst)
        res = dp_with_completion(inst)
        if br.feasible_count:
            assert res.found
            assert all(v >= b for v, b in
                       zip(res.cover_with_multiplicity, inst.cover_bound))
            assert all(v <= b for v, b in
                       zip(res.pack_with_multiplicity, inst.pack_bound))
            assert res.value == inst.objective.eval(res.support)
            assert res.support == res.base_set | res.completion_set
            # completion phase never loses against the plain DP output
            assert 4 * res.value >= br.best_value


def test_completion_reports_infeasible():
    inst = make_instance([[5, 5]], [[1, 1]], [0], [2], LinearOracle([1, 1]))
    res = dp_with_completion(inst)
    assert not res.found


def test_scale_formula_single_element():
    inst = make_instance([[1]], [[4]], [1], [4], LinearOracle([1]))
    sc = scale_instance(inst, 1)
    assert sc.k_cover == (4,)
    assert sc.scaled.covering == ((1,),)
    assert sc.scaled.cover_bound == (1,)


def test_scale_preserves_optimum_feasibility():
    rng = random.Random(41)
    for _ in range(25):
        inst = random_instance(rng, rng.randint(3, 9), p=1, c=1)
        br = brute_optimum(inst)
        if not br.feasible_count:
            continue
        sc = scale_instance(inst, Fraction(1, 2))
        mask = br.best_set
        assert all(v <= b for v, b in
                   zip(sc.scaled.pack_value(mask), sc.scaled.pack_bound))
        assert all(v >= b for v, b in
                   zip(sc.scaled.cover_value(mask), sc.scaled.cover_bound))


def test_scale_round_trip_violation_bounds():
    rng = random.Random(42)
    eps = Fraction(1, 2)
    for _ in range(15):
        inst = random_instance(rng, rng.randint(2, 8), p=1, c=1)
        if inst.pack_bound[0] == 0 or inst.cover_bound[0] == 0:
            continue
        sc = scale_instance(inst, eps)
        for mask in range(1 << inst.n):
            ok_p = all(v <= b for v, b in
                       zip(sc.scaled.pack_value(mask), sc.scaled.pack_bound))
            ok_c = all(v >= b for v, b in
                       zip(sc.scaled.cover_value(mask), sc.scaled.cover_bound))
            if ok_p and ok_c:
                prof = violation_profile(inst, mask)
                assert prof.pack_ratio <= 1 + eps
                assert prof.cover_ratio >= 1 - eps


def test_scale_rejects_bad_epsilon():
    inst = make_instance([[1]], [[1]], [1], [1], LinearOracle([1]))
    with pytest.raises(ValueError):
        scale_instance(inst, 0)
    with pytest.raises(ValueError):
        scale_instance(inst, 2)


def test_cell_budget_guard():
    n = 24
    inst = make_instance(
        [[10 ** 4] * n] * 2, [[10 ** 4] * n] * 2,
        [10 ** 5] * 2, [10 ** 5] * 2, LinearOracle([1] * n))
    with pytest.raises(BudgetExceededError):
        vanilla_dp(inst, saturate_cover=False)


def test_requires_integer_data():
    inst = make_instance([[Fraction(1, 2)]], [[1]], [1], [1], LinearOracle([1]))
    with pytest.raises(ValueError):
        vanilla_dp(inst)
