"""Domain types for staged assortment planning under sequential MNL choice.

A retailer shows products over ``m`` ordered stages. Each product may be
shown up to ``w`` times (its first, second, ... exposure carry separate
attraction weights), at most ``d`` products per stage, and at most once per
stage. Consumers browse stages in order while their patience budget lasts;
patience depletion is described by a survival function ``F``.

Conventions: the Python API indexes products, exposures and stages from 0.
Serialized documents index them from 1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

__all__ = [
    "ModelError",
    "ParseError",
    "ValidationError",
    "FeasibilityError",
    "EnumerationLimitError",
    "PatienceModel",
    "ExponentialPatience",
    "DeterministicPatience",
    "TablePatience",
    "Product",
    "Instance",
    "Assortment",
    "Violation",
    "validate_assortment",
    "assert_feasible",
    "stage_subsets",
    "feasible_profile_bound",
    "enumerate_feasible",
    "GeneratorProfile",
    "PROFILES",
    "generate_instance",
    "sample_feasible_assortment",
    "load_instance",
    "dump_instance",
    "load_assortment",
    "dump_assortment",
]


class ModelError(Exception):
    """Base class for errors raised by this package."""


class ParseError(ModelError):
    """A document is malformed (wrong type, missing field, bad index)."""


class ValidationError(ModelError):
    """A model invariant is violated."""


class FeasibilityError(ModelError):
    """An assortment fails the feasibility rules for its instance."""


class EnumerationLimitError(ModelError):
    """Refusal: an exhaustive operation would exceed its ceiling."""


# ---------------------------------------------------------------------------
# patience models


class PatienceModel:
    """Survival-function view of the consumer patience budget ``B``.

    ``survival(q)`` returns ``P(B >= q)``, nonincreasing with
    ``survival(0) == 1``. Subclasses must keep the conditional-survival
    property ``F(q1) * F(q2) >= F(q1 + q2)``; validation enforces it where it
    is not automatic.
    """

    kind = "abstract"

    def survival(self, q):
        raise NotImplementedError

    def budget_cap(self, rho: float) -> float:
        """Largest spend that keeps survival at least ``rho``.

        Returns ``sup{q >= 0 : survival(q) >= rho}``, ``inf`` when the set is
        unbounded (always the case for ``rho == 0``). Because the sup may sit
        on a discontinuity, callers filtering by ``q <= budget_cap(rho)``
        should re-check ``survival(q) >= rho`` on accepted candidates.
        """
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw ``size`` independent patience budgets."""
        raise NotImplementedError

    def to_doc(self) -> dict:
        raise NotImplementedError

    @staticmethod
    def from_doc(doc: dict) -> "PatienceModel":
        if not isinstance(doc, dict):
            raise ParseError("patience: expected an object")
        kind = doc.get("kind")
        if kind == "exponential":
            return ExponentialPatience(_num(doc, "patience.rate", doc.get("rate")))
        if kind == "deterministic":
            return DeterministicPatience(_num(doc, "patience.budget", doc.get("budget")))
        if kind == "table":
            pts = doc.get("points")
            if not isinstance(pts, list) or not pts:
                raise ParseError("patience.points: expected a non-empty list")
            out = []
            for idx, pair in enumerate(pts):
                if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                    raise ParseError(f"patience.points[{idx}]: expected [spend, survival]")
                out.append((_num(doc, f"patience.points[{idx}][0]", pair[0]),
                            _num(doc, f"patience.points[{idx}][1]", pair[1])))
            return TablePatience(tuple(out))
        raise ParseError(f"patience.kind: unknown kind {kind!r}")


def _validate_rho(rho: float) -> None:
    if not (0.0 <= rho <= 1.0):
        raise ValidationError(f"reachability target must lie in [0, 1], got {rho}")


@dataclass(frozen=True)
class ExponentialPatience(PatienceModel):
    """Memoryless budget: F(q) = exp(-rate * q).

    Satisfies the conditional-survival property with equality, so no grid
    check is needed.
    """

    rate: float
    kind = "exponential"

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ValidationError(f"exponential patience rate must be positive, got {self.rate}")

    def survival(self, q):
        return np.exp(-self.rate * np.asarray(q, dtype=float)) if np.ndim(q) else math.exp(-self.rate * q)

    def budget_cap(self, rho: float) -> float:
        _validate_rho(rho)
        if rho == 0.0:
            return math.inf
        return -math.log(rho) / self.rate

    def sample(self, rng, size):
        return rng.standard_exponential(size) / self.rate

    def to_doc(self):
        return {"kind": "exponential", "rate": self.rate}


@dataclass(frozen=True)
class DeterministicPatience(PatienceModel):
    """Fixed budget: F(q) = 1 while q <= budget, then 0."""

    budget: float
    kind = "deterministic"

    def __post_init__(self):
        if not (self.budget >= 0 and math.isfinite(self.budget)):
            raise ValidationError(f"deterministic patience budget must be >= 0, got {self.budget}")

    def survival(self, q):
        if np.ndim(q):
            return (np.asarray(q, dtype=float) <= self.budget).astype(float)
        return 1.0 if q <= self.budget else 0.0

    def budget_cap(self, rho: float) -> float:
        _validate_rho(rho)
        if rho == 0.0:
            return math.inf
        return self.budget

    def sample(self, rng, size):
        return np.full(size, float(self.budget))

    def to_doc(self):
        return {"kind": "deterministic", "budget": self.budget}


@dataclass(frozen=True)
class TablePatience(PatienceModel):
    """Right-continuous step survival given as (spend, survival) breakpoints.

    The first breakpoint must be (0, 1). Survival values are nonincreasing,
    and the table must pass the conditional-survival grid check
    F(q1) * F(q2) >= F(q1 + q2) over all breakpoint pairs (checking pairs of
    breakpoints is sufficient for step functions).
    """

    points: tuple[tuple[float, float], ...]
    kind = "table"

    def __post_init__(self):
        pts = tuple((float(q), float(s)) for q, s in self.points)
        object.__setattr__(self, "points", pts)
        if not pts or pts[0][0] != 0.0 or pts[0][1] != 1.0:
            raise ValidationError("patience table must start at spend 0 with survival 1")
        qs = [q for q, _ in pts]
        ss = [s for _, s in pts]
        if any(b <= a for a, b in zip(qs, qs[1:])):
            raise ValidationError("patience table spends must be strictly increasing")
        if any(not (0.0 <= s <= 1.0) for s in ss):
            raise ValidationError("patience table survival values must lie in [0, 1]")
        if any(b > a for a, b in zip(ss, ss[1:])):
            raise ValidationError("patience table survival values must be nonincreasing")
        # conditional-survival grid check on all breakpoint pairs; the sum is
        # nudged up a few ulps so exact-breakpoint sums land right-continuous
        for q1, s1 in pts:
            if s1 <= 0.0:
                continue
            for q2, s2 in pts:
                joint = self._survival_scalar((q1 + q2) * (1.0 + 1e-12), qs, ss)
                if s1 * s2 + 1e-12 < joint:
                    raise ValidationError(
                        "conditional survival violated: "
                        f"F({q2}) = {s2} < F({q1 + q2}) / F({q1}) = {joint / s1}"
                    )

    @staticmethod
    def _survival_scalar(q, qs, ss):
        idx = np.searchsorted(qs, q, side="right") - 1
        return ss[idx] if idx >= 0 else 1.0

    def survival(self, q):
        qs = np.array([p[0] for p in self.points])
        ss = np.array([p[1] for p in self.points])
        idx = np.searchsorted(qs, np.asarray(q, dtype=float), side="right") - 1
        out = ss[np.clip(idx, 0, len(ss) - 1)]
        out = np.where(np.asarray(q) < 0, 1.0, out)  # q < 0 does not occur in practice
        return out if np.ndim(q) else float(out)

    def budget_cap(self, rho: float) -> float:
        _validate_rho(rho)
        if rho == 0.0:
            return math.inf
        for q, s in self.points:
            if s < rho:
                return q
        return math.inf

    def sample(self, rng, size):
        qs = np.array([p[0] for p in self.points])
        ss = np.array([p[1] for p in self.points])
        u = rng.random(size)
        count = (ss[None, :] > u[:, None]).sum(axis=1)  # breakpoints surviving past u
        b = qs[count - 1]
        return np.where(u < ss[-1], np.inf, b)

    def to_doc(self):
        return {"kind": "table", "points": [[q, s] for q, s in self.points]}


# ---------------------------------------------------------------------------
# products, instances


@dataclass(frozen=True)
class Product:
    """One product: a unit revenue, a patience cost per display, and one
    attraction weight per exposure (nonincreasing, all positive)."""

    revenue: float
    cost: float
    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(x) for x in self.weights))
        if not (self.revenue >= 0 and math.isfinite(self.revenue)):
            raise ValidationError(f"revenue must be >= 0, got {self.revenue}")
        if not (self.cost >= 0 and math.isfinite(self.cost)):
            raise ValidationError(f"cost must be >= 0, got {self.cost}")
        if not self.weights:
            raise ValidationError("a product needs at least one exposure weight")
        for k, x in enumerate(self.weights):
            if not (x > 0 and math.isfinite(x)):
                raise ValidationError(f"weights must be positive, got {x} at exposure {k}")
        for k in range(1, len(self.weights)):
            if self.weights[k] > self.weights[k - 1]:
                raise ValidationError(
                    f"monotone exposure weights violated at exposure {k}: "
                    f"{self.weights[k]} > {self.weights[k - 1]}"
                )


@dataclass(frozen=True)
class Instance:
    """A planning instance: products plus display geometry and patience.

    m: number of stages, d: per-stage display capacity, w: exposure cap.
    Every product carries exactly w exposure weights.
    """

    products: tuple[Product, ...]
    m: int
    d: int
    w: int
    patience: PatienceModel

    def __post_init__(self):
        object.__setattr__(self, "products", tuple(self.products))
        if not self.products:
            raise ValidationError("an instance needs at least one product")
        for name, val in (("m", self.m), ("d", self.d), ("w", self.w)):
            if not (isinstance(val, int) and val >= 1):
                raise ValidationError(f"{name} must be an integer >= 1, got {val!r}")
        for i, p in enumerate(self.products):
            if len(p.weights) != self.w:
                raise ValidationError(
                    f"product {i} has {len(p.weights)} weights, expected w={self.w}"
                )
        if not isinstance(self.patience, PatienceModel):
            raise ValidationError("patience must be a PatienceModel")

    @property
    def n(self) -> int:
        return len(self.products)

    def zero_revenue_products(self) -> tuple[int, ...]:
        """Indices of products that can never contribute revenue (flagged,
        not rejected; solvers treat them specially)."""
        return tuple(i for i, p in enumerate(self.products) if p.revenue == 0.0)

    def weight(self, i: int, k: int) -> float:
        return self.products[i].weights[k]


# ---------------------------------------------------------------------------
# assortments

Placement = tuple[int, int, int]  # (product, exposure, stage), all 0-based


@dataclass(frozen=True)
class Assortment:
    """A display plan: placements (product, exposure, stage), 0-based.

    Stored sorted for canonical comparison; the tensor view x[i, k, z] is
    available through ``tensor``.
    """

    placements: tuple[Placement, ...]

    def __post_init__(self):
        canon = tuple(sorted((int(i), int(k), int(z)) for i, k, z in self.placements))
        if len(set(canon)) != len(canon):
            raise ValidationError("duplicate placement")
        object.__setattr__(self, "placements", canon)

    @classmethod
    def empty(cls) -> "Assortment":
        return cls(())

    @classmethod
    def from_schedules(cls, schedules: dict[int, Sequence[int]]) -> "Assortment":
        """Build from {product: sorted stages}; exposure k goes to the k-th
        smallest listed stage."""
        pl = []
        for i, stages in schedules.items():
            for k, z in enumerate(sorted(stages)):
                pl.append((i, k, z))
        return cls(tuple(pl))

    @classmethod
    def from_tensor(cls, x: np.ndarray) -> "Assortment":
        i_idx, k_idx, z_idx = np.nonzero(x)
        return cls(tuple(zip(i_idx.tolist(), k_idx.tolist(), z_idx.tolist())))

    def tensor(self, inst: Instance) -> np.ndarray:
        x = np.zeros((inst.n, inst.w, inst.m), dtype=np.int8)
        for i, k, z in self.placements:
            x[i, k, z] = 1
        return x

    def schedules(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {}
        for i, _, z in self.placements:
            out.setdefault(i, []).append(z)
        return {i: tuple(sorted(zs)) for i, zs in out.items()}

    def stage_contents(self, m: int) -> list[list[tuple[int, int]]]:
        """Per stage, the placed (product, exposure) pairs sorted by product."""
        out: list[list[tuple[int, int]]] = [[] for _ in range(m)]
        for i, k, z in self.placements:
            if 0 <= z < m:
                out[z].append((i, k))
        for row in out:
            row.sort()
        return out

    def __len__(self) -> int:
        return len(self.placements)


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str


def validate_assortment(inst: Instance, a: Assortment) -> list[Violation]:
    """Check feasibility; returns an empty list when the assortment is valid.

    Rules: indices in range, at most one exposure of a product per stage,
    exposures form a prefix 0..K-1 placed in strictly increasing stages, and
    at most d placements per stage. Raises ParseError on out-of-range indices
    (a dimension mismatch, not a feasibility question).
    """
    for i, k, z in a.placements:
        if not (0 <= i < inst.n and 0 <= k < inst.w and 0 <= z < inst.m):
            raise ParseError(
                f"placement (product={i}, exposure={k}, stage={z}) is outside "
                f"dimensions n={inst.n}, w={inst.w}, m={inst.m}"
            )
    out: list[Violation] = []
    per_product: dict[int, list[tuple[int, int]]] = {}
    for i, k, z in a.placements:
        per_product.setdefault(i, []).append((k, z))

    for i, pairs in sorted(per_product.items()):
        stages_by_count: dict[int, int] = {}
        for _, z in pairs:
            stages_by_count[z] = stages_by_count.get(z, 0) + 1
        for z, c in sorted(stages_by_count.items()):
            if c > 1:
                out.append(Violation(
                    "per-stage uniqueness",
                    f"product {i} appears {c} times in stage {z}",
                ))
        ks = sorted(k for k, _ in pairs)
        pairs_sorted = sorted(pairs)  # by exposure
        prefix_ok = ks == list(range(len(ks)))
        order_ok = all(
            pairs_sorted[j][1] < pairs_sorted[j + 1][1]
            for j in range(len(pairs_sorted) - 1)
        )
        if not (prefix_ok and order_ok):
            out.append(Violation(
                "prefix-completeness",
                f"product {i}: exposures must be 0..K-1 in strictly increasing "
                f"stages, got {sorted(pairs)}",
            ))
        if len(pairs) > inst.w:
            out.append(Violation(
                "exposure cap",
                f"product {i} has {len(pairs)} exposures, cap is w={inst.w}",
            ))

    counts = [0] * inst.m
    for _, _, z in a.placements:
        counts[z] += 1
    for z, c in enumerate(counts):
        if c > inst.d:
            out.append(Violation(
                "capacity",
                f"stage {z} holds {c} placements, capacity is d={inst.d}",
            ))
    return out


def assert_feasible(inst: Instance, a: Assortment) -> None:
    violations = validate_assortment(inst, a)
    if violations:
        raise FeasibilityError("; ".join(v.message for v in violations))


# ---------------------------------------------------------------------------
# enumeration


def stage_subsets(m: int, w: int) -> list[tuple[int, ...]]:
    """All stage subsets of size <= w, ordered by (size, stages). The empty
    schedule comes first."""
    out: list[tuple[int, ...]] = []
    for size in range(0, min(w, m) + 1):
        out.extend(itertools.combinations(range(m), size))
    return out


def feasible_profile_bound(inst: Instance) -> int:
    """Upper bound on the number of feasible assortments (capacity ignored)."""
    return len(stage_subsets(inst.m, inst.w)) ** inst.n


def enumerate_feasible(inst: Instance, ceiling: int = 1_000_000) -> Iterator[Assortment]:
    """Stream every feasible assortment, the empty one first.

    Refuses upfront when the schedule-profile bound exceeds ``ceiling``.
    """
    bound = feasible_profile_bound(inst)
    if bound > ceiling:
        raise EnumerationLimitError(
            f"enumeration refused: about {bound} schedule profiles exceeds the "
            f"ceiling of {ceiling}"
        )
    subsets = stage_subsets(inst.m, inst.w)
    counts = [0] * inst.m

    def rec(i: int, chosen: list[tuple[int, ...]]):
        if i == inst.n:
            yield Assortment.from_schedules({
                j: s for j, s in enumerate(chosen) if s
            })
            return
        for s in subsets:
            if all(counts[z] < inst.d for z in s):
                for z in s:
                    counts[z] += 1
                chosen.append(s)
                yield from rec(i + 1, chosen)
                chosen.pop()
                for z in s:
                    counts[z] -= 1

    yield from rec(0, [])


# ---------------------------------------------------------------------------
# generation

Range = Union[float, tuple[float, float]]


@dataclass(frozen=True)
class GeneratorProfile:
    """Parameter ranges for random instances. Scalars pin a value, pairs draw
    uniformly from [lo, hi]."""

    revenue: Range = (0.5, 2.0)
    base_weight: Range = (0.5, 2.0)
    decay: Range = (0.5, 1.0)  # weights[k] = base * decay**k
    cost: Range = (0.2, 1.0)
    patience: str = "exponential"
    patience_rate: Range = (0.3, 1.2)
    patience_budget: Range = (1.0, 6.0)
    zero_revenue_share: float = 0.0


PROFILES = {
    "default": GeneratorProfile(),
    # tight ranges keep solver grids small; handy for stress sweeps
    "narrow": GeneratorProfile(
        revenue=(0.8, 1.6), base_weight=(0.8, 1.6), decay=(0.7, 1.0), cost=(0.3, 1.0),
        patience_rate=(0.4, 1.0),
    ),
    "deterministic": GeneratorProfile(patience="deterministic"),
}


def _draw(rng: np.random.Generator, r: Range) -> float:
    if isinstance(r, tuple):
        lo, hi = r
        return float(rng.uniform(lo, hi))
    return float(r)


def generate_instance(
    seed: int,
    n: int,
    m: int,
    d: int,
    w: int,
    profile: GeneratorProfile | str = "default",
) -> Instance:
    """Deterministically generate a random instance from ``seed``.

    Exposure weights decay geometrically, so the monotone-weights invariant
    holds by construction.
    """
    if isinstance(profile, str):
        try:
            profile = PROFILES[profile]
        except KeyError:
            raise ParseError(f"unknown generator profile {profile!r}") from None
    rng = np.random.Generator(np.random.Philox(seed))
    products = []
    for _ in range(n):
        revenue = _draw(rng, profile.revenue)
        if profile.zero_revenue_share and rng.random() < profile.zero_revenue_share:
            revenue = 0.0
        base = _draw(rng, profile.base_weight)
        decay = _draw(rng, profile.decay)
        weights = tuple(base * decay**k for k in range(w))
        products.append(Product(revenue=revenue, cost=_draw(rng, profile.cost), weights=weights))
    if profile.patience == "exponential":
        patience: PatienceModel = ExponentialPatience(rate=_draw(rng, profile.patience_rate))
    elif profile.patience == "deterministic":
        patience = DeterministicPatience(budget=_draw(rng, profile.patience_budget))
    else:
        raise ParseError(f"unknown patience family {profile.patience!r}")
    return Instance(products=tuple(products), m=m, d=d, w=w, patience=patience)


def sample_feasible_assortment(inst: Instance, rng: np.random.Generator) -> Assortment:
    """Draw a random feasible assortment (uniform over schedules per product,
    then repaired to respect capacity)."""
    subsets = stage_subsets(inst.m, inst.w)
    chosen = [list(subsets[rng.integers(len(subsets))]) for _ in range(inst.n)]
    while True:
        counts = [0] * inst.m
        for s in chosen:
            for z in s:
                counts[z] += 1
        over = [z for z, c in enumerate(counts) if c > inst.d]
        if not over:
            break
        z = over[0]
        users = [i for i, s in enumerate(chosen) if z in s]
        drop = users[rng.integers(len(users))]
        # dropping a stage from a schedule keeps it a valid stage subset
        chosen[drop].remove(z)
    return Assortment.from_schedules({i: s for i, s in enumerate(chosen) if s})


# ---------------------------------------------------------------------------
# documents


def _num(doc, path: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _int(path: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{path}: expected an integer, got {value!r}")
    return value


def instance_from_doc(doc: dict) -> Instance:
    if not isinstance(doc, dict):
        raise ParseError("instance document: expected an object")
    for key in ("m", "d", "w", "products", "patience"):
        if key not in doc:
            raise ParseError(f"instance document: missing field {key!r}")
    m, d, w = (_int(k, doc[k]) for k in ("m", "d", "w"))
    if not isinstance(doc["products"], list) or not doc["products"]:
        raise ParseError("products: expected a non-empty list")
    products = []
    for idx, p in enumerate(doc["products"]):
        if not isinstance(p, dict):
            raise ParseError(f"products[{idx}]: expected an object")
        try:
            weights = tuple(
                _num(p, f"products[{idx}].weights[{j}]", x)
                for j, x in enumerate(p.get("weights", ()))
            )
            products.append(Product(
                revenue=_num(p, f"products[{idx}].revenue", p.get("revenue")),
                cost=_num(p, f"products[{idx}].cost", p.get("cost")),
                weights=weights,
            ))
        except ValidationError as exc:
            raise ValidationError(f"products[{idx}]: {exc}") from None
    patience = PatienceModel.from_doc(doc["patience"])
    return Instance(products=tuple(products), m=m, d=d, w=w, patience=patience)


def instance_to_doc(inst: Instance) -> dict:
    return {
        "m": inst.m,
        "d": inst.d,
        "w": inst.w,
        "products": [
            {"revenue": p.revenue, "cost": p.cost, "weights": list(p.weights)}
            for p in inst.products
        ],
        "patience": inst.patience.to_doc(),
    }


def assortment_from_doc(doc: dict) -> Assortment:
    if not isinstance(doc, dict) or "placements" not in doc:
        raise ParseError("assortment document: expected an object with 'placements'")
    if not isinstance(doc["placements"], list):
        raise ParseError("placements: expected a list")
    pl = []
    for idx, entry in enumerate(doc["placements"]):
        if not isinstance(entry, dict):
            raise ParseError(f"placements[{idx}]: expected an object")
        trip = []
        for key in ("product", "exposure", "stage"):
            val = _int(f"placements[{idx}].{key}", entry.get(key))
            if val < 1:
                raise ParseError(f"placements[{idx}].{key}: document indices start at 1")
            trip.append(val - 1)
        pl.append(tuple(trip))
    return Assortment(tuple(pl))


def assortment_to_doc(a: Assortment) -> dict:
    return {
        "placements": [
            {"product": i + 1, "exposure": k + 1, "stage": z + 1}
            for i, k, z in a.placements
        ]
    }


def load_instance(text: str) -> Instance:
    from .reportio import parse_json
    return instance_from_doc(parse_json(text, what="instance document"))


def dump_instance(inst: Instance) -> str:
    from .reportio import dumps_document
    return dumps_document(instance_to_doc(inst))


def load_assortment(text: str) -> Assortment:
    from .reportio import parse_json
    return assortment_from_doc(parse_json(text, what="assortment document"))


def dump_assortment(a: Assortment) -> str:
    from .reportio import dumps_document
    return dumps_document(assortment_to_doc(a))
