"""Closed-form evaluation of staged assortments.

Purchase probabilities take a staged multinomial-logit form: within the stages a
consumer is patient enough to browse, the chance that the first utility
exceeding the outside option appears at stage t splits multiplicatively into
a patience factor (survival of the cost accumulated over earlier stages) and
an attraction ratio built from cumulative stage weight sums.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Assortment, FeasibilityError, Instance, assert_feasible

__all__ = [
    "reachability",
    "choice_probability",
    "purchase_probabilities",
    "expected_revenue",
    "patience_free_revenue",
    "EvaluationReport",
    "evaluate",
]


def _stage_sums(inst: Instance, a: Assortment):
    """Per-stage totals: attraction weight, weighted revenue, patience cost."""
    beta = np.zeros(inst.m)
    gamma = np.zeros(inst.m)
    cost = np.zeros(inst.m)
    for i, k, z in a.placements:
        wgt = inst.products[i].weights[k]
        beta[z] += wgt
        gamma[z] += inst.products[i].revenue * wgt
        cost[z] += inst.products[i].cost
    return beta, gamma, cost


def reachability(inst: Instance, a: Assortment, t: int) -> float:
    """Probability that the consumer is patient enough to browse stage t
    (0-based). Stage 0 is always reached."""
    if not (0 <= t < inst.m):
        raise IndexError(f"stage {t} out of range for m={inst.m}")
    if t == 0:
        return 1.0
    _, _, cost = _stage_sums(inst, a)
    return float(inst.patience.survival(float(cost[:t].sum())))


def _prob_matrix(inst: Instance, a: Assortment, patient: bool) -> np.ndarray:
    beta, _, cost = _stage_sums(inst, a)
    w_cum = np.concatenate(([0.0], np.cumsum(beta)))  # w_cum[t] = sum through stage t-1
    reach = np.ones(inst.m)
    if not patient:
        prefix = np.concatenate(([0.0], np.cumsum(cost)))[: inst.m]
        reach = np.asarray(inst.patience.survival(prefix), dtype=float)
        reach[0] = 1.0  # exact, no round-trip through survival
    p = np.zeros((inst.n, inst.m))
    for i, k, z in a.placements:
        wgt = inst.products[i].weights[k]
        p[i, z] += reach[z] * wgt / ((1.0 + w_cum[z]) * (1.0 + w_cum[z + 1]))
    return p


def choice_probability(inst: Instance, a: Assortment, i: int, t: int) -> float:
    """Probability the consumer purchases product i at stage t (0-based)."""
    if not (0 <= i < inst.n):
        raise IndexError(f"product {i} out of range for n={inst.n}")
    if not (0 <= t < inst.m):
        raise IndexError(f"stage {t} out of range for m={inst.m}")
    return float(_prob_matrix(inst, a, patient=False)[i, t])


def purchase_probabilities(inst: Instance, a: Assortment) -> np.ndarray:
    """The full n-by-m purchase probability matrix."""
    return _prob_matrix(inst, a, patient=False)


def expected_revenue(inst: Instance, a: Assortment, check: bool = True) -> float:
    """Expected revenue of a feasible assortment."""
    if check:
        assert_feasible(inst, a)
    p = _prob_matrix(inst, a, patient=False)
    rev = np.array([prod.revenue for prod in inst.products])
    return float(rev @ p.sum(axis=1))


def patience_free_revenue(inst: Instance, a: Assortment, check: bool = True) -> float:
    """Expected revenue if every consumer had unlimited patience."""
    if check:
        assert_feasible(inst, a)
    p = _prob_matrix(inst, a, patient=True)
    rev = np.array([prod.revenue for prod in inst.products])
    return float(rev @ p.sum(axis=1))


@dataclass(frozen=True)
class EvaluationReport:
    """Everything the closed form says about one assortment."""

    per_stage_reachability: tuple[float, ...]
    purchase_prob: np.ndarray  # n x m
    no_purchase_prob: float
    expected_revenue: float
    patience_free_revenue: float

    def to_results(self) -> dict:
        return {
            "per_stage_reachability": list(self.per_stage_reachability),
            "purchase_prob": self.purchase_prob.tolist(),
            "no_purchase_prob": self.no_purchase_prob,
            "expected_revenue": self.expected_revenue,
            "patience_free_revenue": self.patience_free_revenue,
        }


def evaluate(inst: Instance, a: Assortment) -> EvaluationReport:
    """Validate then evaluate an assortment, bundling all derived numbers."""
    assert_feasible(inst, a)
    _, _, cost = _stage_sums(inst, a)
    prefix = np.concatenate(([0.0], np.cumsum(cost)))[: inst.m]
    reach = np.asarray(inst.patience.survival(prefix), dtype=float)
    reach[0] = 1.0
    p = _prob_matrix(inst, a, patient=False)
    rev = np.array([prod.revenue for prod in inst.products])
    f_val = float(rev @ p.sum(axis=1))
    g_val = patience_free_revenue(inst, a, check=False)
    return EvaluationReport(
        per_stage_reachability=tuple(float(x) for x in reach),
        purchase_prob=p,
        no_purchase_prob=1.0 - float(p.sum()),
        expected_revenue=f_val,
        patience_free_revenue=g_val,
    )
