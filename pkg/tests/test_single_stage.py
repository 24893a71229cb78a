import itertools

import numpy as np
import pytest

from cmnl import (
    DeterministicPatience,
    Instance,
    Product,
    generate_instance,
    single_stage_revenue,
    solve_single_stage,
)


def make_mnl(pairs, d):
    products = tuple(Product(revenue=r, cost=0.0, weights=(b,)) for r, b in pairs)
    return Instance(products=products, m=1, d=d, w=1,
                    patience=DeterministicPatience(budget=1.0))


def best_by_enumeration(inst):
    best_set, best_val = (), 0.0
    for size in range(inst.d + 1):
        for s in itertools.combinations(range(inst.n), size):
            val = single_stage_revenue(inst, s)
            if val > best_val or (val == best_val and s < best_set):
                best_val, best_set = val, s
    return best_set, best_val


def test_single_candidate_beats_empty():
    inst = make_mnl([(1.0, 1.0)], d=1)
    res = solve_single_stage(inst)
    assert res.selected == (0,)
    assert res.revenue == pytest.approx(0.5)


def test_three_product_reference():
    inst = make_mnl([(10.0, 0.5), (8.0, 1.0), (1.0, 10.0)], d=2)
    res = solve_single_stage(inst)
    assert res.selected == (0, 1)
    assert res.revenue == pytest.approx(5.2)
    assert res.assortment.placements == ((0, 0, 0), (1, 0, 0))


def test_zero_revenue_prefers_empty():
    inst = make_mnl([(0.0, 2.0), (0.0, 5.0)], d=2)
    res = solve_single_stage(inst)
    assert res.selected == ()
    assert res.revenue == 0.0
    assert res.assortment.placements == ()


def test_agrees_with_enumeration():
    rng = np.random.default_rng(17)
    for trial in range(60):
        n = int(rng.integers(1, 9))
        d = int(rng.integers(1, n + 1))
        pairs = [
            (float(rng.uniform(0.0, 5.0)), float(rng.uniform(0.1, 4.0)))
            for _ in range(n)
        ]
        inst = make_mnl(pairs, d)
        res = solve_single_stage(inst)
        ref_set, ref_val = best_by_enumeration(inst)
        assert res.revenue == ref_val
        assert res.selected == ref_set


def test_fixed_point_identity():
    for seed in range(20):
        inst = generate_instance(seed=700 + seed, n=6, m=1, d=3, w=1)
        res = solve_single_stage(inst)
        lhs = sum(
            inst.products[i].weights[0] * (inst.products[i].revenue - res.revenue)
            for i in res.selected
        )
        assert abs(lhs - res.revenue) <= 1e-9


def test_permutation_invariant_value():
    pairs = [(10.0, 0.5), (8.0, 1.0), (1.0, 10.0), (3.0, 2.0)]
    base = solve_single_stage(make_mnl(pairs, d=2)).revenue
    for perm in itertools.permutations(range(4)):
        shuffled = [pairs[p] for p in perm]
        assert solve_single_stage(make_mnl(shuffled, d=2)).revenue == pytest.approx(
            base, rel=1e-12
        )


def test_value_ties_break_to_smaller_index_set():
    inst = make_mnl([(2.0, 1.0), (2.0, 1.0)], d=1)
    res = solve_single_stage(inst)
    assert res.selected == (0,)


def test_uses_first_exposure_weight_only():
    # later-exposure weights must not leak into the stage-0 problem
    products = (
        Product(revenue=1.0, cost=0.0, weights=(3.0, 0.1)),
        Product(revenue=1.0, cost=0.0, weights=(1.0, 0.9)),
    )
    inst = Instance(products=products, m=2, d=1, w=2,
                    patience=DeterministicPatience(budget=1.0))
    res = solve_single_stage(inst)
    assert res.selected == (0,)
    assert res.revenue == pytest.approx(0.75)
