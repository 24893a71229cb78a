import math

import numpy as np
import pytest

import cmnl.griddp as griddp
from cmnl import (
    Assortment,
    DeterministicPatience,
    DpRefusalError,
    EPSILON_MAX,
    ExponentialPatience,
    GridError,
    HAVE_COMPILED_CORE,
    Instance,
    Product,
    TablePatience,
    assert_feasible,
    brute_force_patient_optimum,
    build_grids,
    complexity_estimate,
    dp_solve,
    enumerate_feasible,
    generate_instance,
    sample_feasible_assortment,
)
from cmnl.griddp import discretize_exposures, fill_for_guess, patience_budget_cap


def grid_reference_instance():
    # weighted revenues span [1, 4], weights span [1, 4]
    products = (
        Product(revenue=1.0, cost=0.5, weights=(4.0, 1.0)),
        Product(revenue=1.0, cost=0.5, weights=(2.0, 2.0)),
        Product(revenue=1.5, cost=0.5, weights=(2.0, 1.0)),
        Product(revenue=1.0, cost=0.5, weights=(3.0, 2.0)),
        Product(revenue=2.0, cost=0.5, weights=(1.5, 1.0)),
    )
    return Instance(products=products, m=2, d=2, w=2,
                    patience=ExponentialPatience(rate=1.0))


def test_grid_reference_points():
    inst = grid_reference_instance()
    grids = build_grids(inst, epsilon=0.5)
    assert grids.gamma_min == 1.0 and grids.gamma_max == 4.0
    expect = [1.0, 1.5, 2.25, 3.375, 5.0625, 7.59375, 11.390625, 17.0859375]
    assert list(grids.gamma_points) == pytest.approx(expect)
    assert list(grids.beta_points) == pytest.approx(expect)
    # covers every achievable per-stage sum: top point above d * max
    assert grids.gamma_points[-1] >= inst.d * grids.gamma_max
    assert grids.gamma_points[0] == grids.gamma_min


def test_single_value_grid_still_spans():
    inst = Instance(
        products=(Product(1.0, 0.1, (1.0,)),),
        m=1, d=1, w=1, patience=ExponentialPatience(rate=1.0),
    )
    grids = build_grids(inst, epsilon=0.5)
    assert grids.gamma_points[0] == 1.0
    assert grids.gamma_points[-1] >= 1.0 / 0.5  # up to d * gamma_min / eps


def test_epsilon_range_enforced(two_product_staged):
    inst, _ = two_product_staged
    for eps in (0.0, -0.2, EPSILON_MAX, 0.9):
        with pytest.raises(ValueError, match="epsilon"):
            build_grids(inst, eps)
        with pytest.raises(ValueError, match="epsilon"):
            dp_solve(inst, rho=0.5, epsilon=eps)


def test_degenerate_grid_error():
    inst = Instance(
        products=(Product(0.0, 0.5, (1.0,)), Product(0.0, 0.5, (2.0,))),
        m=1, d=1, w=1, patience=ExponentialPatience(rate=1.0),
    )
    with pytest.raises(GridError, match="exact-patient"):
        build_grids(inst, epsilon=0.5)
    # the planning figure still works, degenerate grid counted as one point
    assert complexity_estimate(inst, epsilon=0.5) > 0


def test_budget_caps():
    lam = math.log(2.0)
    assert patience_budget_cap(ExponentialPatience(rate=lam), 0.5) == pytest.approx(1.0)
    assert patience_budget_cap(ExponentialPatience(rate=lam), 0.0) == math.inf
    assert patience_budget_cap(DeterministicPatience(budget=3.0), 0.7) == 3.0
    table = TablePatience(points=((0.0, 1.0), (1.0, 0.8), (2.0, 0.5), (3.0, 0.0)))
    assert patience_budget_cap(table, 0.6) == 2.0
    assert patience_budget_cap(table, 0.5) == 3.0


def test_complexity_reference_value():
    inst = grid_reference_instance()
    # m^w * (d(d/eps+1))^(2m) * |I| * |J| * n * (d+1)^m
    assert complexity_estimate(inst, epsilon=0.5) == pytest.approx(1.152e8)


def test_refusals_cite_estimate(two_product_staged):
    inst, _ = two_product_staged
    with pytest.raises(DpRefusalError, match="planning estimate") as exc:
        dp_solve(inst, rho=0.5, epsilon=0.5, max_cells=10)
    assert exc.value.estimate > 0
    with pytest.raises(DpRefusalError, match="operation limit") as exc2:
        dp_solve(inst, rho=0.5, epsilon=0.5, max_ops=1.0)
    assert exc2.value.estimate == pytest.approx(exc.value.estimate)


def test_rho_validated(two_product_staged):
    inst, _ = two_product_staged
    with pytest.raises(ValueError, match="rho"):
        dp_solve(inst, rho=1.5, epsilon=0.5)


def test_dp_matches_oracle_two_product(two_product_staged):
    inst, _ = two_product_staged
    res = dp_solve(inst, rho=0.5, epsilon=0.5)
    assert res.value == pytest.approx(4 / 3)
    assert res.assortment.placements == ((1, 0, 0),)
    d = res.diagnostics
    assert d.guesses_run <= d.guesses_total
    assert d.fill_steps == d.guesses_run * d.steps_per_guess
    assert d.kernel in {"compiled", "python"}


def test_dp_rho_one_only_free_products(two_product_staged):
    inst, _ = two_product_staged
    res = dp_solve(inst, rho=1.0, epsilon=0.5)
    assert res.assortment.placements == ()
    assert res.value == 0.0


def test_dp_never_beats_oracle_and_holds_ratio():
    eps = 0.5
    t = eps * (1.0 + eps)
    kappa = (1.0 - t) / (1.0 + t) ** 2
    for seed in range(5):
        inst = generate_instance(seed=800 + seed, n=3, m=2, d=1, w=2)
        res = dp_solve(inst, rho=0.5, epsilon=eps)
        opt = brute_force_patient_optimum(inst, rho=0.5)
        assert res.value <= opt.value + 1e-12
        assert res.value >= kappa * opt.value - 1e-12
        total = sum(inst.products[i].cost for i, _, _ in res.assortment.placements)
        assert float(inst.patience.survival(total)) >= 0.5


def test_dp_with_zero_revenue_product_present():
    products = (
        Product(revenue=0.0, cost=0.2, weights=(1.0,)),
        Product(revenue=2.0, cost=0.2, weights=(2.0,)),
    )
    inst = Instance(products=products, m=1, d=2, w=1,
                    patience=ExponentialPatience(rate=1.0))
    res = dp_solve(inst, rho=0.5, epsilon=0.5)
    opt = brute_force_patient_optimum(inst, rho=0.5)
    assert res.value == pytest.approx(opt.value)


def micro_instance():
    products = (
        Product(revenue=1.0, cost=0.3, weights=(2.0, 1.0)),
        Product(revenue=3.0, cost=0.7, weights=(1.0, 0.5)),
    )
    return Instance(products=products, m=2, d=1, w=2,
                    patience=ExponentialPatience(rate=0.5))


def enumerate_cells(inst, epsilon, mu, nu):
    """Reference min-cost table keyed by digit signature."""
    gt, bt, adm = discretize_exposures(inst, epsilon, mu, nu)
    ref = {}
    for a in enumerate_feasible(inst):
        if not all(adm[i, k] for i, k, _ in a.placements):
            continue
        u = [0] * inst.m
        v = [0] * inst.m
        l = [0] * inst.m
        cost = 0.0
        for i, k, z in a.placements:
            u[z] += int(gt[i, k])
            v[z] += int(bt[i, k])
            l[z] += 1
            cost += inst.products[i].cost
        key = (tuple(u), tuple(v), tuple(l))
        if key not in ref or cost < ref[key]:
            ref[key] = cost
    return ref


@pytest.mark.parametrize("pick", ["max", "min"])
def test_table_matches_exhaustive_min_cost(pick):
    inst = micro_instance()
    eps = 0.5
    grids = build_grids(inst, eps)
    mu = grids.gamma_max if pick == "max" else grids.gamma_min
    nu = grids.beta_max if pick == "max" else grids.beta_min
    gf = fill_for_guess(inst, eps, [mu, mu], [nu, nu])
    ref = enumerate_cells(inst, eps, mu, nu)

    for (u, v, l), cost in ref.items():
        assert gf.cost_at(u, v, l) == pytest.approx(cost, abs=1e-9)
    finite = int(np.isfinite(gf.h).sum())
    assert finite == len(ref)


def test_reconstruction_round_trip():
    inst = micro_instance()
    eps = 0.5
    grids = build_grids(inst, eps)
    gf = fill_for_guess(inst, eps, [grids.gamma_max] * 2, [grids.beta_max] * 2)
    for cell in np.flatnonzero(np.isfinite(gf.h)):
        a = gf.reconstruct(int(cell))
        assert_feasible(inst, a)
        cost = sum(inst.products[i].cost for i, _, _ in a.placements)
        assert cost == pytest.approx(float(gf.h[cell]), abs=1e-9)


def test_fill_rejects_bad_guess_length():
    inst = micro_instance()
    with pytest.raises(ValueError):
        fill_for_guess(inst, 0.5, [1.0], [1.0, 1.0])


@pytest.mark.skipif(not HAVE_COMPILED_CORE, reason="compiled core not built")
def test_kernels_bit_identical(monkeypatch):
    from cmnl import _dpcore_py

    inst = generate_instance(seed=901, n=3, m=2, d=2, w=2)
    grids = build_grids(inst, 0.5)
    mus = [grids.gamma_points[2]] * 2
    nus = [grids.beta_points[1]] * 2
    fast = fill_for_guess(inst, 0.5, mus, nus)
    monkeypatch.setattr(griddp, "_kernel", _dpcore_py)
    slow = fill_for_guess(inst, 0.5, mus, nus)
    assert fast.steps == slow.steps
    assert np.array_equal(fast.h, slow.h, equal_nan=True)
    assert np.array_equal(fast.bp, slow.bp)


def stage_totals(inst, a):
    gamma = [0.0] * inst.m
    beta = [0.0] * inst.m
    cost = 0.0
    for i, k, z in a.placements:
        p = inst.products[i]
        gamma[z] += p.revenue * p.weights[k]
        beta[z] += p.weights[k]
        cost += p.cost
    return gamma, beta, cost


def bracket(points, target):
    for x in points:
        if x >= target:
            return x
    raise AssertionError(f"grid does not cover {target}")


def test_bracketing_guess_distortion_bounds():
    # scheduling any reference assortment under its bracketing guess lands in
    # a cell whose reconstruction distorts each stage total by bounded factors
    eps = 0.5
    t = eps * (1.0 + eps)
    rng = np.random.default_rng(23)
    checked = 0
    for seed in range(8):
        inst = generate_instance(seed=950 + seed, n=3, m=2, d=2, w=2)
        a_star = sample_feasible_assortment(inst, rng)
        if not a_star.placements:
            continue
        grids = build_grids(inst, eps)
        g_star, b_star, cost_star = stage_totals(inst, a_star)
        mus = [grids.gamma_points[0] if g == 0.0 else bracket(grids.gamma_points, g)
               for g in g_star]
        nus = [grids.beta_points[0] if b == 0.0 else bracket(grids.beta_points, b)
               for b in b_star]
        gf = fill_for_guess(inst, eps, mus, nus)

        u = [0] * inst.m
        v = [0] * inst.m
        l = [0] * inst.m
        for i, k, z in a_star.placements:
            gt, bt, adm = discretize_exposures(inst, eps, mus[z], nus[z])
            assert adm[i, k]
            u[z] += int(gt[i, k])
            v[z] += int(bt[i, k])
            l[z] += 1
        h_cell = gf.cost_at(u, v, l)
        assert h_cell <= cost_star + 1e-9

        a_prime = gf.reconstruct(gf.cell_index(u, v, l))
        assert_feasible(inst, a_prime)
        g_prime, b_prime, cost_prime = stage_totals(inst, a_prime)
        assert cost_prime == pytest.approx(h_cell, abs=1e-9)
        for z in range(inst.m):
            assert g_prime[z] >= (1.0 - t) * g_star[z] - 1e-9
            assert b_prime[z] <= (1.0 + t) * b_star[z] + 1e-9
        checked += 1
    assert checked >= 5


def test_dp_rho_zero_runs_unconstrained():
    inst = micro_instance()
    res = dp_solve(inst, rho=0.0, epsilon=0.5)
    opt = brute_force_patient_optimum(inst, rho=0.0)
    assert res.value <= opt.value + 1e-12
    assert res.value > 0.0
