"""Patience-constrained assortment search by geometric guessing plus DP.

The solver guesses, per stage, a geometric-grid bracket for the stage's
weighted-revenue total and weight total, rescales both quantities to small
integers under each guess, and runs a layered min-cost DP over the
discretized state (per-stage scaled totals and occupancy). Every table cell
whose display cost keeps survival above the target is reconstructed and
re-evaluated exactly; the best candidate wins. Approximation quality
degrades gracefully with the grid ratio epsilon.

The table fill is delegated to a compiled kernel when available, otherwise
to a numpy implementation of the same contract (see HAVE_COMPILED_CORE).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .model import Assortment, Instance, ModelError, stage_subsets

try:  # compiled core is optional; the fallback is bit-identical
    from . import _dpcore as _kernel

    HAVE_COMPILED_CORE = True
except ImportError:  # pragma: no cover - depends on build environment
    from . import _dpcore_py as _kernel

    HAVE_COMPILED_CORE = False

__all__ = [
    "HAVE_COMPILED_CORE",
    "EPSILON_MAX",
    "GridError",
    "DpRefusalError",
    "Grids",
    "build_grids",
    "patience_budget_cap",
    "complexity_estimate",
    "discretize_exposures",
    "GuessFill",
    "fill_for_guess",
    "DpDiagnostics",
    "DpResult",
    "dp_solve",
]

# epsilon must keep 1 - eps*(1+eps) positive for the ratio guarantee
EPSILON_MAX = (math.sqrt(5.0) - 1.0) / 2.0


class GridError(ModelError):
    """The geometric grids cannot be built (degenerate value range)."""


class DpRefusalError(ModelError):
    """Refusal: the table or guess sweep would exceed the configured budget."""

    def __init__(self, message: str, estimate: float):
        super().__init__(message)
        self.estimate = estimate


@dataclass(frozen=True)
class Grids:
    """Geometric candidate values for per-stage totals."""

    gamma_points: tuple[float, ...]  # weighted-revenue totals
    beta_points: tuple[float, ...]  # weight totals
    epsilon: float
    gamma_min: float
    gamma_max: float
    beta_min: float
    beta_max: float


def _check_epsilon(epsilon: float) -> None:
    if not (0.0 < epsilon < EPSILON_MAX):
        raise ValueError(
            f"epsilon must lie in (0, {EPSILON_MAX:.6f}), got {epsilon}"
        )


def _geometric(vmin: float, vmax: float, d: int, epsilon: float) -> tuple[float, ...]:
    # covers [vmin, d * vmax / epsilon] with ratio (1 + epsilon), from a = 0
    top = d * vmax / (epsilon * vmin)
    count = math.ceil(math.log(top) / math.log1p(epsilon)) + 1
    return tuple(vmin * (1.0 + epsilon) ** a for a in range(count))


def build_grids(inst: Instance, epsilon: float) -> Grids:
    """Geometric grids over positive weighted revenues and weights.

    Zero-revenue products contribute no weighted revenue; they are excluded
    from the revenue grid but stay placeable (their scaled revenue is 0).
    """
    _check_epsilon(epsilon)
    gammas = [
        p.revenue * w for p in inst.products for w in p.weights if p.revenue > 0.0
    ]
    if not gammas:
        raise GridError(
            "every product has zero revenue; the guess grids are degenerate "
            "(use the exhaustive patient solver, --method exact-patient)"
        )
    betas = [w for p in inst.products for w in p.weights]
    gmin, gmax = min(gammas), max(gammas)
    bmin, bmax = min(betas), max(betas)
    return Grids(
        gamma_points=_geometric(gmin, gmax, inst.d, epsilon),
        beta_points=_geometric(bmin, bmax, inst.d, epsilon),
        epsilon=epsilon,
        gamma_min=gmin,
        gamma_max=gmax,
        beta_min=bmin,
        beta_max=bmax,
    )


def patience_budget_cap(patience, rho: float) -> float:
    """Largest spend whose survival stays at least rho (inf when unbounded)."""
    return patience.budget_cap(rho)


def complexity_estimate(inst: Instance, epsilon: float) -> float:
    """Planning figure for one dp_solve call: guess count times table work.

    Computed as m**w * (d * (d/eps + 1))**(2m) * |I| * |J| * n * (d+1)**m.
    Never raises; degenerate grids count as a single point.
    """
    _check_epsilon(epsilon)
    m, d, w, n = inst.m, inst.d, inst.w, inst.n

    def grid_size(vals: list[float]) -> int:
        if not vals:
            return 1
        top = d * max(vals) / (epsilon * min(vals))
        return math.ceil(math.log(top) / math.log1p(epsilon)) + 1

    gammas = [p.revenue * x for p in inst.products for x in p.weights if p.revenue > 0]
    betas = [x for p in inst.products for x in p.weights]
    table = (d * (d / epsilon + 1.0)) ** (2 * m)
    return float(m**w) * table * grid_size(gammas) * grid_size(betas) * n * float((d + 1) ** m)


def discretize_exposures(inst: Instance, epsilon: float, mu: float, nu: float):
    """Scaled integer values of every (product, exposure) under one guess.

    Returns (gamma_tilde, beta_tilde, admissible) with shape (n, w).
    A placement is admissible when its weighted revenue is at most mu and
    its weight at most nu; scaled revenue rounds up, scaled weight rounds
    down, inadmissible entries are zeroed.
    """
    gamma = np.array([[p.revenue * x for x in p.weights] for p in inst.products])
    beta = np.array([list(p.weights) for p in inst.products])
    adm = (gamma <= mu) & (beta <= nu)
    gscale = mu * epsilon / inst.d
    bscale = nu * epsilon / inst.d
    gt = np.where(adm, np.ceil(gamma / gscale), 0).astype(np.int64)
    bt = np.where(adm, np.floor(beta / bscale), 0).astype(np.int64)
    return gt, bt, adm


class _DpMachine:
    """Instance-level precomputation shared by every guess."""

    def __init__(self, inst: Instance, epsilon: float):
        _check_epsilon(epsilon)
        self.inst = inst
        self.epsilon = epsilon
        m, d, w, n = inst.m, inst.d, inst.w, inst.n
        self.subsets = stage_subsets(m, w)
        S = len(self.subsets)
        self.S = S
        self.D = 3 * m

        # integer caps: scaled revenue <= ceil(d/eps) per admissible placement,
        # scaled weight <= floor(d/eps), at most d placements per stage
        self.u_max = d * math.ceil(d / epsilon)
        self.v_max = d * math.floor(d / epsilon)
        self.radix = np.array(
            [self.u_max + 1] * m + [self.v_max + 1] * m + [d + 1] * m, dtype=np.int64
        )
        self.cells = int(np.prod(self.radix))
        self.strides = np.ones(self.D, dtype=np.int64)
        for g in range(self.D - 2, -1, -1):
            self.strides[g] = self.strides[g + 1] * self.radix[g + 1]

        # which exposure serves stage z under schedule s (-1: unused)
        self.expo_of = np.full((S, m), -1, dtype=np.int64)
        for s, stages in enumerate(self.subsets):
            for k, z in enumerate(stages):
                self.expo_of[s, z] = k

        # true per-stage contributions of (product, schedule)
        self.true_gamma = np.zeros((n, S, m))
        self.true_beta = np.zeros((n, S, m))
        self.cost = np.zeros((n, S))
        for j, p in enumerate(inst.products):
            for s, stages in enumerate(self.subsets):
                for k, z in enumerate(stages):
                    self.true_gamma[j, s, z] = p.revenue * p.weights[k]
                    self.true_beta[j, s, z] = p.weights[k]
                self.cost[j, s] = len(stages) * p.cost

    def pair_data(self, mu: float, nu: float):
        return discretize_exposures(self.inst, self.epsilon, mu, nu)

    def assemble(self, pairs):
        """Build kernel inputs from one discretization per stage."""
        inst = self.inst
        n, m, S, D = inst.n, inst.m, self.S, self.D
        delta = np.zeros((n, S, D), dtype=np.int64)
        adm = np.ones((n, S), dtype=bool)
        for z in range(m):
            gt, bt, ad = pairs[z]
            ks = self.expo_of[:, z]
            used = np.flatnonzero(ks >= 0)
            if used.size == 0:
                continue
            kcol = ks[used]
            delta[:, used, z] = gt[:, kcol]
            delta[:, used, m + z] = bt[:, kcol]
            delta[:, used, 2 * m + z] = 1
            adm[:, used] &= ad[:, kcol]
        flat = delta.reshape(n * S, D) @ self.strides
        return delta, adm.astype(np.uint8), flat.reshape(n, S)

    def fill(self, delta, adm):
        h = np.full(self.cells, np.inf)
        h[0] = 0.0
        bp = np.zeros((self.inst.n, self.cells), dtype=np.int16)
        steps = _kernel.fill(self.radix, delta, self.cost, adm, h, bp)
        return h, bp, steps

    def walk(self, bp, flat_delta, cells_idx):
        """Backpointer walk: schedule ids per product for each listed cell."""
        n = self.inst.n
        cur = cells_idx.astype(np.int64).copy()
        sched = np.zeros((cells_idx.size, n), dtype=np.int64)
        for j in range(n - 1, -1, -1):
            s = bp[j, cur].astype(np.int64)
            sched[:, j] = s
            cur -= flat_delta[j, s]
        if cur.size and (cur != 0).any():
            raise AssertionError("backpointer walk did not return to the origin")
        return sched

    def values_of(self, sched):
        """Exact patient revenue of each reconstructed candidate."""
        rows = np.arange(self.inst.n)
        G = self.true_gamma[rows[None, :], sched, :].sum(axis=1)
        B = self.true_beta[rows[None, :], sched, :].sum(axis=1)
        W = np.cumsum(B, axis=1)
        Wprev = W - B
        return (G / ((1.0 + Wprev) * (1.0 + W))).sum(axis=1)

    def placements_of(self, sched_row) -> tuple:
        pl = []
        for j, s in enumerate(sched_row):
            for k, z in enumerate(self.subsets[s]):
                pl.append((j, k, int(z)))
        return tuple(sorted(pl))


@dataclass(frozen=True)
class GuessFill:
    """One guess's filled table, for inspection and reconstruction."""

    machine: _DpMachine
    h: np.ndarray
    bp: np.ndarray
    flat_delta: np.ndarray
    steps: int

    def cell_index(self, u, v, l) -> int:
        digits = np.array(list(u) + list(v) + list(l), dtype=np.int64)
        if (digits < 0).any() or (digits >= self.machine.radix).any():
            raise IndexError("cell digits out of range")
        return int(digits @ self.machine.strides)

    def cost_at(self, u, v, l) -> float:
        return float(self.h[self.cell_index(u, v, l)])

    def reconstruct(self, cell: int) -> Assortment:
        sched = self.machine.walk(self.bp, self.flat_delta, np.array([cell]))
        return Assortment(self.machine.placements_of(sched[0]))


def fill_for_guess(inst: Instance, epsilon: float, mus, nus) -> GuessFill:
    """Fill the DP table for one explicit guess (one mu, nu per stage)."""
    if len(mus) != inst.m or len(nus) != inst.m:
        raise ValueError("need one guess value per stage")
    machine = _DpMachine(inst, epsilon)
    pairs = [machine.pair_data(mu, nu) for mu, nu in zip(mus, nus)]
    delta, adm, flat = machine.assemble(pairs)
    h, bp, steps = machine.fill(delta, adm)
    return GuessFill(machine=machine, h=h, bp=bp, flat_delta=flat, steps=steps)


@dataclass(frozen=True)
class DpDiagnostics:
    table_cells: int
    guesses_total: int
    guesses_run: int
    fill_steps: int
    steps_per_guess: int
    candidates: int
    kernel: str

    def to_results(self) -> dict:
        return {
            "table_cells": self.table_cells,
            "guesses_total": self.guesses_total,
            "guesses_run": self.guesses_run,
            "fill_steps": self.fill_steps,
            "steps_per_guess": self.steps_per_guess,
            "candidates": self.candidates,
            "kernel": self.kernel,
        }


@dataclass(frozen=True)
class DpResult:
    assortment: Assortment
    value: float  # patience-free revenue, re-evaluated exactly
    diagnostics: DpDiagnostics


def dp_solve(
    inst: Instance,
    rho: float,
    epsilon: float,
    max_cells: int = 8_000_000,
    max_ops: float = 2e10,
) -> DpResult:
    """Approximately maximize patient revenue subject to the survival floor.

    Feasibility of every returned candidate is certified exactly: the DP
    tracks true display cost, candidates are filtered by survival(cost) >=
    rho, and values come from exact re-evaluation of the reconstruction.
    Ties break toward the lexicographically smallest placement list.
    """
    if not (0.0 <= rho <= 1.0):
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    grids = build_grids(inst, epsilon)
    machine = _DpMachine(inst, epsilon)
    cap = patience_budget_cap(inst.patience, rho)
    estimate = complexity_estimate(inst, epsilon)

    if machine.cells > max_cells:
        raise DpRefusalError(
            f"table of {machine.cells} cells exceeds the limit of {max_cells} "
            f"(planning estimate {estimate:.3g} steps)",
            estimate,
        )

    # one discretization per (mu, nu); identical discretizations collapse
    pair_list = []
    pair_ids = {}
    for mu, nu in itertools.product(grids.gamma_points, grids.beta_points):
        gt, bt, adm = machine.pair_data(mu, nu)
        key = (gt.tobytes(), bt.tobytes(), adm.tobytes())
        if key not in pair_ids:
            pair_ids[key] = len(pair_list)
            pair_list.append((gt, bt, adm))
    guesses_total = (len(grids.gamma_points) * len(grids.beta_points)) ** inst.m
    guesses_run = len(pair_list) ** inst.m

    per_guess = inst.n * machine.cells * machine.S
    if guesses_run * per_guess > max_ops:
        raise DpRefusalError(
            f"sweep of {guesses_run} distinct guesses x {per_guess} fill steps "
            f"exceeds the operation limit of {max_ops:.3g} "
            f"(planning estimate {estimate:.3g} steps)",
            estimate,
        )

    survival = inst.patience.survival
    best_val = 0.0
    best_pl: tuple = ()
    fill_steps = 0
    candidates = 0
    for combo in itertools.product(pair_list, repeat=inst.m):
        delta, adm, flat = machine.assemble(combo)
        h, bp, steps = machine.fill(delta, adm)
        fill_steps += steps
        idx = np.flatnonzero(np.isfinite(h) & (h <= cap))
        if idx.size == 0:
            continue
        keep = np.asarray(survival(h[idx]), dtype=float) >= rho
        idx = idx[keep]
        if idx.size == 0:
            continue
        candidates += int(idx.size)
        sched = machine.walk(bp, flat, idx)
        vals = machine.values_of(sched)
        top = float(vals.max())
        if top < best_val:
            continue
        for row in np.flatnonzero(vals == top):
            pl = machine.placements_of(sched[row])
            if top > best_val or (top == best_val and pl < best_pl):
                best_val, best_pl = top, pl

    assortment = Assortment(best_pl)
    # exact engine value for the winner (same quantity, canonical summation)
    from .evaluate import patience_free_revenue

    value = patience_free_revenue(inst, assortment)
    return DpResult(
        assortment=assortment,
        value=value,
        diagnostics=DpDiagnostics(
            table_cells=machine.cells,
            guesses_total=guesses_total,
            guesses_run=guesses_run,
            fill_steps=fill_steps,
            steps_per_guess=per_guess,
            candidates=candidates,
            kernel="compiled" if HAVE_COMPILED_CORE else "python",
        ),
    )
