"""Two-branch approximation for staged assortment revenue.

Branch one restricts attention to patient consumers: it maximizes the
patience-free revenue subject to keeping the survival of the total display
cost above a floor rho, via the grid DP. Branch two ignores staging and
solves the exact single-display problem, which is immune to patience
because nothing precedes the first stage. The better branch under the full
model wins. The certified fraction of the true optimum is

    kappa * rho * (1 - rho) / 2,   kappa = (1 - e(1+e)) / (1 + e(1+e))**2

for grid ratio e; both knobs are caller-visible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .evaluate import evaluate, expected_revenue, patience_free_revenue
from .griddp import DpRefusalError, GridError, dp_solve
from .model import Assortment, Instance
from .single_stage import solve_single_stage

__all__ = [
    "guarantee_factor",
    "certified_ratio",
    "SolveReport",
    "solve_acme",
    "sweep_rho",
]


def guarantee_factor(epsilon: float) -> float:
    """Grid-induced loss factor kappa for the patient branch."""
    t = epsilon * (1.0 + epsilon)
    return (1.0 - t) / (1.0 + t) ** 2


def certified_ratio(rho: float, epsilon: float) -> float:
    """Certified fraction of the unconstrained optimum for one (rho, epsilon)."""
    return guarantee_factor(epsilon) * rho * (1.0 - rho) / 2.0


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one solve, with enough detail to audit the choice."""

    assortment: Assortment
    method: str
    rho: float
    epsilon: float
    expected_revenue: float
    patience_free_revenue: float
    winning_branch: str  # "grid-dp" | "single-stage"
    dp_guarantee: float  # kappa
    certified_ratio: float  # kappa * rho * (1 - rho) / 2, 0 when degraded
    per_stage_reachability: tuple[float, ...]
    degraded: bool = False
    degraded_reason: str = ""

    def to_results(self, inst: Instance) -> dict:
        doc = {
            "method": self.method,
            "rho": self.rho,
            "epsilon": self.epsilon,
            "expected_revenue": self.expected_revenue,
            "patience_free_revenue": self.patience_free_revenue,
            "winning_branch": self.winning_branch,
            "dp_guarantee": self.dp_guarantee,
            "certified_ratio": self.certified_ratio,
            "per_stage_reachability": list(self.per_stage_reachability),
            "placements": [
                {"product": i + 1, "exposure": k + 1, "stage": z + 1}
                for (i, k, z) in self.assortment.placements
            ],
        }
        if self.degraded:
            doc["degraded"] = True
            doc["degraded_reason"] = self.degraded_reason
        return doc


def solve_acme(
    inst: Instance,
    rho: float = 0.5,
    epsilon: float = 0.3,
    max_cells: int = 8_000_000,
    max_ops: float = 2e10,
) -> SolveReport:
    """Run both branches and keep the one with higher expected revenue.

    When the grid DP refuses (or the grids are degenerate), the solver
    degrades to the single-display branch alone and reports a certified
    ratio of zero rather than failing.
    """
    if not (0.0 < rho < 1.0):
        raise ValueError(f"rho must lie strictly inside (0, 1), got {rho}")
    single = solve_single_stage(inst)
    f_single = expected_revenue(inst, single.assortment)

    degraded = False
    reason = ""
    dp_assortment: Assortment | None = None
    try:
        dp = dp_solve(inst, rho, epsilon, max_cells=max_cells, max_ops=max_ops)
        dp_assortment = dp.assortment
    except (GridError, DpRefusalError) as exc:
        degraded = True
        reason = str(exc)

    kappa = guarantee_factor(epsilon)
    if dp_assortment is not None:
        f_dp = expected_revenue(inst, dp_assortment)
        g_dp = patience_free_revenue(inst, dp_assortment)
        # survival(total cost) >= rho is certified, so f >= rho * g
        if f_dp < rho * g_dp - 1e-9 * max(1.0, abs(g_dp)):
            raise AssertionError(
                "patient-branch candidate lost more than the survival floor allows"
            )
    else:
        f_dp = -math.inf

    if f_dp > f_single:
        chosen, branch = dp_assortment, "grid-dp"
    else:
        chosen, branch = single.assortment, "single-stage"

    report_eval = evaluate(inst, chosen)
    return SolveReport(
        assortment=chosen,
        method="acme",
        rho=rho,
        epsilon=epsilon,
        expected_revenue=report_eval.expected_revenue,
        patience_free_revenue=report_eval.patience_free_revenue,
        winning_branch=branch,
        dp_guarantee=kappa,
        certified_ratio=0.0 if degraded else certified_ratio(rho, epsilon),
        per_stage_reachability=report_eval.per_stage_reachability,
        degraded=degraded,
        degraded_reason=reason,
    )


def sweep_rho(
    inst: Instance,
    rhos,
    epsilon: float = 0.3,
    max_cells: int = 8_000_000,
    max_ops: float = 2e10,
) -> tuple[SolveReport, list[SolveReport]]:
    """Solve at several survival floors and keep the best expected revenue.

    Floors are tried in ascending order; strict improvement moves the
    winner, so ties keep the smallest floor.
    """
    reports = []
    best = None
    for rho in sorted(rhos):
        rep = solve_acme(inst, rho, epsilon, max_cells=max_cells, max_ops=max_ops)
        reports.append(rep)
        if best is None or rep.expected_revenue > best.expected_revenue:
            best = rep
    if best is None:
        raise ValueError("sweep needs at least one survival floor")
    return best, reports
