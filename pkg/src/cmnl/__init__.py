"""Staged assortment planning under multinomial-logit choice with patience.

Consumers browse a fixed sequence of display stages, each holding up to d
products; repeat exposures raise a product's attention weight according to
a per-product schedule, while browsing costs draw down a random patience
budget. The package evaluates assortments in closed form, checks them by
simulation, and optimizes them exactly (small instances) or approximately
with a certified revenue ratio.
"""

from .acme import (
    SolveReport,
    certified_ratio,
    guarantee_factor,
    solve_acme,
    sweep_rho,
)
from .evaluate import (
    EvaluationReport,
    choice_probability,
    evaluate,
    expected_revenue,
    patience_free_revenue,
    purchase_probabilities,
    reachability,
)
from .griddp import (
    EPSILON_MAX,
    HAVE_COMPILED_CORE,
    DpRefusalError,
    DpResult,
    GridError,
    Grids,
    build_grids,
    complexity_estimate,
    dp_solve,
)
from .model import (
    Assortment,
    DeterministicPatience,
    EnumerationLimitError,
    ExponentialPatience,
    FeasibilityError,
    Instance,
    ModelError,
    ParseError,
    PatienceModel,
    Product,
    TablePatience,
    ValidationError,
    Violation,
    assert_feasible,
    dump_assortment,
    dump_instance,
    enumerate_feasible,
    feasible_profile_bound,
    generate_instance,
    load_assortment,
    load_instance,
    sample_feasible_assortment,
    validate_assortment,
)
from .oracle import (
    brute_force_patient_optimum,
    brute_force_revenue_optimum,
    truncate_to_reachability,
)
from .simulate import (
    Abandoned,
    Exhausted,
    Purchase,
    SimEstimate,
    estimate_probabilities,
    sample_gumbel,
    simulate_consumer,
)
from .single_stage import SingleStageResult, single_stage_revenue, solve_single_stage

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Abandoned",
    "Assortment",
    "DeterministicPatience",
    "DpRefusalError",
    "DpResult",
    "EnumerationLimitError",
    "EPSILON_MAX",
    "EvaluationReport",
    "Exhausted",
    "ExponentialPatience",
    "FeasibilityError",
    "GridError",
    "Grids",
    "HAVE_COMPILED_CORE",
    "Instance",
    "ModelError",
    "ParseError",
    "PatienceModel",
    "Product",
    "Purchase",
    "SimEstimate",
    "SingleStageResult",
    "SolveReport",
    "TablePatience",
    "ValidationError",
    "Violation",
    "assert_feasible",
    "brute_force_patient_optimum",
    "brute_force_revenue_optimum",
    "build_grids",
    "certified_ratio",
    "choice_probability",
    "complexity_estimate",
    "dp_solve",
    "dump_assortment",
    "dump_instance",
    "enumerate_feasible",
    "estimate_probabilities",
    "evaluate",
    "expected_revenue",
    "feasible_profile_bound",
    "generate_instance",
    "guarantee_factor",
    "load_assortment",
    "load_instance",
    "patience_free_revenue",
    "purchase_probabilities",
    "reachability",
    "sample_feasible_assortment",
    "sample_gumbel",
    "simulate_consumer",
    "single_stage_revenue",
    "solve_acme",
    "solve_single_stage",
    "sweep_rho",
    "truncate_to_reachability",
    "validate_assortment",
]
