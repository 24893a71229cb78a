"""Exhaustive reference solvers.

These enumerate every feasible assortment directly, so they are slow but
authoritative. Ties break toward the lexicographically smallest placement
list, which also steers optima toward gap-free stage usage (shifting a
block of placements earlier across an empty stage never changes the value).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import (
    Assortment,
    EnumerationLimitError,
    Instance,
    assert_feasible,
    feasible_profile_bound,
    stage_subsets,
)

__all__ = [
    "OracleResult",
    "brute_force_revenue_optimum",
    "brute_force_patient_optimum",
    "truncate_to_reachability",
]


@dataclass(frozen=True)
class OracleResult:
    assortment: Assortment
    value: float


def _check_ceiling(inst: Instance, ceiling: int) -> None:
    bound = feasible_profile_bound(inst)
    if bound > ceiling:
        raise EnumerationLimitError(
            f"exhaustive search refused: about {bound} schedule profiles exceeds "
            f"the ceiling of {ceiling}"
        )


def _schedule_tables(inst: Instance):
    """Per product, per stage subset: stage-wise weight and weighted-revenue
    contributions plus the display cost of the whole schedule."""
    subsets = stage_subsets(inst.m, inst.w)
    beta = []   # beta[i][s][z]
    gamma = []  # gamma[i][s][z]
    cost = []   # cost[i][s]
    for i, prod in enumerate(inst.products):
        brow, grow, crow = [], [], []
        for s in subsets:
            b = [0.0] * inst.m
            g = [0.0] * inst.m
            for k, z in enumerate(s):
                b[z] = prod.weights[k]
                g[z] = prod.revenue * prod.weights[k]
            brow.append(b)
            grow.append(g)
            crow.append(len(s) * prod.cost)
        beta.append(brow)
        gamma.append(grow)
        cost.append(crow)
    return subsets, beta, gamma, cost


def _value(inst: Instance, beta_sum, gamma_sum, cost_sum, patient: bool) -> float:
    total = 0.0
    w_prev = 0.0
    spent = 0.0
    for z in range(inst.m):
        w_cur = w_prev + beta_sum[z]
        reach = 1.0 if (patient or z == 0) else float(inst.patience.survival(spent))
        total += reach * gamma_sum[z] / ((1.0 + w_prev) * (1.0 + w_cur))
        spent += cost_sum[z]
        w_prev = w_cur
    return total


def _placements_of(subsets, chosen) -> tuple:
    pl = []
    for i, s_idx in enumerate(chosen):
        for k, z in enumerate(subsets[s_idx]):
            pl.append((i, k, z))
    return tuple(sorted(pl))


def _search(inst: Instance, patient: bool, rho: float | None, ceiling: int) -> OracleResult:
    _check_ceiling(inst, ceiling)
    subsets, beta, gamma, cost = _schedule_tables(inst)
    counts = [0] * inst.m
    chosen = [0] * inst.n
    best: dict = {"value": -math.inf, "placements": None}

    def leaf():
        beta_sum = [0.0] * inst.m
        gamma_sum = [0.0] * inst.m
        cost_sum = [0.0] * inst.m
        total_cost = 0.0
        for i in range(inst.n):
            s = chosen[i]
            for z in range(inst.m):
                beta_sum[z] += beta[i][s][z]
                gamma_sum[z] += gamma[i][s][z]
            total_cost += cost[i][s]
            for k, z in enumerate(subsets[s]):
                cost_sum[z] += inst.products[i].cost
        if rho is not None and float(inst.patience.survival(total_cost)) < rho:
            return
        val = _value(inst, beta_sum, gamma_sum, cost_sum, patient)
        if val > best["value"]:
            best.update(value=val, placements=_placements_of(subsets, chosen))
        elif val == best["value"] and best["placements"] is not None:
            pl = _placements_of(subsets, chosen)
            if pl < best["placements"]:
                best["placements"] = pl

    def rec(i: int):
        if i == inst.n:
            leaf()
            return
        for s_idx, s in enumerate(subsets):
            if all(counts[z] < inst.d for z in s):
                for z in s:
                    counts[z] += 1
                chosen[i] = s_idx
                rec(i + 1)
                for z in s:
                    counts[z] -= 1

    rec(0)
    if best["placements"] is None:
        return OracleResult(Assortment.empty(), 0.0)
    return OracleResult(Assortment(best["placements"]), best["value"])


def brute_force_revenue_optimum(inst: Instance, ceiling: int = 1_000_000) -> OracleResult:
    """Maximize expected revenue over all feasible assortments."""
    return _search(inst, patient=False, rho=None, ceiling=ceiling)


def brute_force_patient_optimum(
    inst: Instance, rho: float, ceiling: int = 1_000_000
) -> OracleResult:
    """Maximize the patience-free revenue subject to survival of the total
    display cost staying at least rho."""
    if not (0.0 <= rho <= 1.0):
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    return _search(inst, patient=True, rho=rho, ceiling=ceiling)


def truncate_to_reachability(inst: Instance, a: Assortment, rho: float) -> Assortment:
    """Drop all placements in stages whose reachability falls below rho.

    Reachability is nonincreasing over stages, so this keeps a stage prefix;
    dropping a suffix of stages also drops a suffix of each product's
    exposures, preserving feasibility.
    """
    if not (0.0 <= rho <= 1.0):
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    assert_feasible(inst, a)
    stage_cost = [0.0] * inst.m
    for i, _, z in a.placements:
        stage_cost[z] += inst.products[i].cost
    keep = 1  # stage 0 is always reached
    spent = stage_cost[0]
    for t in range(1, inst.m):
        if float(inst.patience.survival(spent)) < rho:
            break
        keep = t + 1
        spent += stage_cost[t]
    return Assortment(tuple(p for p in a.placements if p[2] < keep))
