import numpy as np
import pytest

from cmnl import (
    Assortment,
    DeterministicPatience,
    EnumerationLimitError,
    ExponentialPatience,
    Instance,
    Product,
    brute_force_patient_optimum,
    brute_force_revenue_optimum,
    expected_revenue,
    generate_instance,
    patience_free_revenue,
    sample_feasible_assortment,
    truncate_to_reachability,
)


def test_revenue_optimum_two_product(two_product_staged):
    inst, _ = two_product_staged
    res = brute_force_revenue_optimum(inst)
    # rich product up front, cheap one behind it
    assert res.assortment.placements == ((0, 0, 1), (1, 0, 0))
    assert res.value == pytest.approx(1.375)
    assert expected_revenue(inst, res.assortment) == pytest.approx(res.value)


def test_patient_optimum_two_product(two_product_staged):
    inst, _ = two_product_staged
    res = brute_force_patient_optimum(inst, rho=0.5)
    # both products would cost 2 with survival 0.25; one product survives
    assert res.assortment.placements == ((1, 0, 0),)
    assert res.value == pytest.approx(4 / 3)
    assert patience_free_revenue(inst, res.assortment) == pytest.approx(res.value)


def test_patient_optimum_rho_zero_unconstrained(two_product_staged):
    inst, _ = two_product_staged
    res = brute_force_patient_optimum(inst, rho=0.0)
    assert res.assortment.placements == ((0, 0, 1), (1, 0, 0))
    assert res.value == pytest.approx(17 / 12)


def test_patient_optimum_rho_one_forces_zero_cost(two_product_staged):
    inst, _ = two_product_staged
    res = brute_force_patient_optimum(inst, rho=1.0)
    assert res.assortment.placements == ()
    assert res.value == 0.0

    free = Instance(
        products=(Product(1.0, 0.0, (1.0,)),),
        m=1, d=1, w=1, patience=ExponentialPatience(rate=1.0),
    )
    res2 = brute_force_patient_optimum(free, rho=1.0)
    assert res2.assortment.placements == ((0, 0, 0),)
    assert res2.value == pytest.approx(0.5)


def test_patient_optimum_rho_validation(two_product_staged):
    inst, _ = two_product_staged
    for rho in (-0.1, 1.0001):
        with pytest.raises(ValueError):
            brute_force_patient_optimum(inst, rho=rho)


def test_ceiling_refusal(two_product_staged):
    inst, _ = two_product_staged
    with pytest.raises(EnumerationLimitError, match="ceiling"):
        brute_force_revenue_optimum(inst, ceiling=5)
    with pytest.raises(EnumerationLimitError):
        brute_force_patient_optimum(inst, rho=0.5, ceiling=5)


def test_tie_breaks_lexicographically():
    twin = Product(1.0, 0.0, (1.0,))
    inst = Instance(
        products=(twin, twin), m=1, d=1, w=1,
        patience=DeterministicPatience(budget=1.0),
    )
    res = brute_force_revenue_optimum(inst)
    assert res.assortment.placements == ((0, 0, 0),)


def test_optimum_dominates_random_assortments():
    rng = np.random.default_rng(11)
    for trial in range(10):
        inst = generate_instance(seed=400 + trial, n=3, m=2, d=2, w=2)
        best = brute_force_revenue_optimum(inst)
        for _ in range(20):
            a = sample_feasible_assortment(inst, rng)
            assert best.value >= expected_revenue(inst, a) - 1e-12


def test_patient_optimum_respects_constraint():
    for trial in range(10):
        inst = generate_instance(seed=500 + trial, n=3, m=2, d=2, w=2)
        res = brute_force_patient_optimum(inst, rho=0.5)
        total = sum(inst.products[i].cost for i, _, _ in res.assortment.placements)
        assert float(inst.patience.survival(total)) >= 0.5


def test_truncate_noop_at_rho_zero(two_product_staged):
    inst, a = two_product_staged
    assert truncate_to_reachability(inst, a, 0.0).placements == a.placements


def test_truncate_keeps_reachable_prefix(two_product_staged):
    inst, a = two_product_staged
    # survival after the stage-0 spend is exactly 0.5
    assert truncate_to_reachability(inst, a, 0.5).placements == a.placements
    assert truncate_to_reachability(inst, a, 0.6).placements == ((0, 0, 0),)


def test_truncate_always_keeps_stage_zero():
    inst = Instance(
        products=(Product(1.0, 1.0, (1.0, 1.0)),),
        m=2, d=1, w=2, patience=DeterministicPatience(budget=0.0),
    )
    a = Assortment(((0, 0, 0), (0, 1, 1)))
    out = truncate_to_reachability(inst, a, 1.0)
    assert out.placements == ((0, 0, 0),)


def test_truncate_validates(two_product_staged):
    inst, a = two_product_staged
    with pytest.raises(ValueError):
        truncate_to_reachability(inst, a, 1.5)
