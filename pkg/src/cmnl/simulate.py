"""Monte Carlo consumer simulator.

Implements the browsing process directly, independently of the closed-form
evaluator: one Gumbel utility per displayed exposure, one Gumbel outside
option, one patience budget per consumer. The consumer walks stages in
order; she purchases the stage argmax the first time a stage maximum beats
the outside option, and keeps browsing only while her budget covers the
cumulative display cost.

Streams are counter-based (Philox). Batches use jumped substreams of the
user seed with a fixed batch size, so estimates depend only on (seed,
trials), never on scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Assortment, Instance, assert_feasible

__all__ = [
    "Purchase",
    "Abandoned",
    "Exhausted",
    "sample_gumbel",
    "simulate_consumer",
    "SimEstimate",
    "estimate_probabilities",
]

_BATCH = 1 << 16  # fixed internal batch size; part of the determinism contract


@dataclass(frozen=True)
class Purchase:
    product: int
    stage: int


@dataclass(frozen=True)
class Abandoned:
    last_stage_browsed: int


@dataclass(frozen=True)
class Exhausted:
    pass


def sample_gumbel(location: float, rng) -> float:
    """One standard-scale Gumbel draw: location - ln(-ln U), U uniform (0,1)."""
    u = rng.random()
    while u == 0.0:  # measure-zero guard; keeps the transform finite
        u = rng.random()
    return location - math.log(-math.log(u))


def simulate_consumer(inst: Instance, a: Assortment, rng: np.random.Generator):
    """Walk one consumer through the stages; returns Purchase, Abandoned or
    Exhausted.

    Draw order: outside option, then displayed exposures by (stage, product),
    then the patience budget.
    """
    outside = sample_gumbel(0.0, rng)
    contents = a.stage_contents(inst.m)
    utilities: list[list[tuple[float, int]]] = []
    for z in range(inst.m):
        row = []
        for i, k in contents[z]:
            mu = math.log(inst.products[i].weights[k])
            row.append((sample_gumbel(mu, rng), i))
        utilities.append(row)
    budget = float(inst.patience.sample(rng, 1)[0])

    spent = 0.0
    for z in range(inst.m):
        row = utilities[z]
        if row:
            best_u, best_i = row[0]
            for u, i in row[1:]:
                if u > best_u:  # ties keep the lower product index
                    best_u, best_i = u, i
            if best_u > outside:
                return Purchase(product=best_i, stage=z)
        spent += sum(inst.products[i].cost for i, _ in contents[z])
        if z + 1 < inst.m and budget < spent:
            return Abandoned(last_stage_browsed=z)
    return Exhausted()


@dataclass(frozen=True)
class SimEstimate:
    """Aggregated simulation output for one assortment."""

    purchase_freq: np.ndarray  # n x m fraction of trials purchasing (i, t)
    std_err: np.ndarray  # n x m binomial standard errors
    patience_reach_freq: np.ndarray  # per stage, fraction with budget >= prefix cost
    purchased: int
    abandoned: int
    exhausted: int
    trials: int
    seed: int

    def to_results(self) -> dict:
        return {
            "purchase_freq": self.purchase_freq.tolist(),
            "std_err": self.std_err.tolist(),
            "patience_reach_freq": self.patience_reach_freq.tolist(),
            "outcomes": {
                "purchased": self.purchased,
                "abandoned": self.abandoned,
                "exhausted": self.exhausted,
            },
            "trials": self.trials,
            "seed": self.seed,
        }


def estimate_probabilities(
    inst: Instance, a: Assortment, trials: int, seed: int
) -> SimEstimate:
    """Estimate the purchase probability matrix by simulation.

    Vectorized over consumers; deterministic for a fixed (seed, trials) pair.
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    assert_feasible(inst, a)

    contents = a.stage_contents(inst.m)
    # flat exposure table, ordered by (stage, product) to pin the draw order
    flat: list[tuple[int, int, int]] = []  # (stage, product, exposure)
    for z in range(inst.m):
        for i, k in contents[z]:
            flat.append((z, i, k))
    mus = np.array([math.log(inst.products[i].weights[k]) for _, i, k in flat])
    stage_cost = np.zeros(inst.m)
    for i, k, z in a.placements:
        stage_cost[z] += inst.products[i].cost
    prefix = np.concatenate(([0.0], np.cumsum(stage_cost)))  # prefix[t]: cost before stage t

    counts = np.zeros((inst.n, inst.m), dtype=np.int64)
    reach_counts = np.zeros(inst.m, dtype=np.int64)
    purchased = abandoned = exhausted = 0

    done = 0
    batch_index = 0
    while done < trials:
        take = min(_BATCH, trials - done)
        rng = np.random.Generator(np.random.Philox(key=seed).jumped(batch_index))
        u = rng.random(take)
        u[u == 0.0] = 0.5  # measure-zero guard, keeps the stream aligned
        outside = -np.log(-np.log(u))
        if flat:
            ue = rng.random((len(flat), take))
            ue[ue == 0.0] = 0.5
            util = mus[:, None] - np.log(-np.log(ue))
        else:
            util = np.empty((0, take))
        budget = inst.patience.sample(rng, take)

        stage_max = np.full((inst.m, take), -np.inf)
        stage_arg = np.zeros((inst.m, take), dtype=np.int64)
        for z in range(inst.m):
            rows = [idx for idx, (zz, _, _) in enumerate(flat) if zz == z]
            if rows:
                block = util[rows, :]
                arg = block.argmax(axis=0)  # first max wins: lower product index
                stage_max[z] = block[arg, np.arange(take)]
                prods = np.array([flat[r][1] for r in rows])
                stage_arg[z] = prods[arg]

        can_reach = budget[None, :] >= prefix[: inst.m, None]
        reach_counts += can_reach.sum(axis=1)
        hit = (stage_max > outside[None, :]) & can_reach
        any_hit = hit.any(axis=0)
        first = hit.argmax(axis=0)

        buyers = np.flatnonzero(any_hit)
        if buyers.size:
            np.add.at(counts, (stage_arg[first[buyers], buyers], first[buyers]), 1)
        purchased += int(any_hit.sum())
        # non-buyers abandon iff the budget cannot carry them into the last
        # stage; the last stage's own cost gates nothing
        nb = np.flatnonzero(~any_hit)
        if nb.size:
            ran_out = budget[nb] < prefix[inst.m - 1]
            abandoned += int(ran_out.sum())
            exhausted += int(nb.size - ran_out.sum())

        done += take
        batch_index += 1

    freq = counts / trials
    se = np.sqrt(freq * (1.0 - freq) / trials)
    return SimEstimate(
        purchase_freq=freq,
        std_err=se,
        patience_reach_freq=reach_counts / trials,
        purchased=purchased,
        abandoned=abandoned,
        exhausted=exhausted,
        trials=trials,
        seed=seed,
    )
