"""Optimal single-stage assortment under plain MNL with a capacity cap.

Uses the classic threshold characterization: a set S maximizing
sum(r_i * b_i) / (1 + sum(b_i)) consists of the up-to-d products with the
largest positive scores b_i * (r_i - lam) at lam equal to the optimal value.
Sweeping lam over all score breakpoints (score crossings and sign changes),
plus interval midpoints so every distinct ranking appears, produces a
candidate family guaranteed to contain an optimal set.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import Assortment, Instance

__all__ = ["SingleStageResult", "single_stage_revenue", "solve_single_stage"]


@dataclass(frozen=True)
class SingleStageResult:
    assortment: Assortment  # the chosen products placed at stage 0
    selected: tuple[int, ...]
    revenue: float


def single_stage_revenue(inst: Instance, subset) -> float:
    """Stage-0 revenue of a product subset under first-exposure weights."""
    num = 0.0
    den = 1.0
    for i in sorted(subset):
        b = inst.products[i].weights[0]
        num += inst.products[i].revenue * b
        den += b
    return num / den


def solve_single_stage(inst: Instance) -> SingleStageResult:
    """Best single-stage assortment (capacity d, first-exposure weights).

    Exact: evaluates every candidate produced by the threshold sweep plus
    the empty set, breaking value ties toward the lexicographically smallest
    index set.
    """
    n = inst.n
    r = [p.revenue for p in inst.products]
    b = [p.weights[0] for p in inst.products]

    breakpoints = {0.0}
    breakpoints.update(r)
    for i in range(n):
        for j in range(i + 1, n):
            if b[i] != b[j]:
                breakpoints.add((b[i] * r[i] - b[j] * r[j]) / (b[i] - b[j]))
    lams = sorted(lam for lam in breakpoints if lam >= 0.0)
    sweep = list(lams)
    sweep.extend((x + y) / 2.0 for x, y in zip(lams, lams[1:]))

    candidates = {(): None}
    for lam in sweep:
        scored = sorted(
            ((b[i] * (r[i] - lam), i) for i in range(n) if b[i] * (r[i] - lam) > 0.0),
            key=lambda t: (-t[0], t[1]),
        )
        take = tuple(sorted(i for _, i in scored[: inst.d]))
        candidates[take] = None

    best_set: tuple[int, ...] = ()
    best_val = 0.0
    for s in candidates:
        val = single_stage_revenue(inst, s)
        if val > best_val or (val == best_val and s < best_set):
            best_val, best_set = val, s

    a = Assortment(tuple((i, 0, 0) for i in best_set))
    return SingleStageResult(assortment=a, selected=best_set, revenue=best_val)
