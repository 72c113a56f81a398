"""Exact tools for smoothed-complexity experiments at desk scale."""

__version__ = "0.1.0"

from .dist import (  # noqa: E402
    CoefficientFamily,
    Phi,
    TableFamily,
    coefficient_family,
    cumulative,
    family_from_json,
    mass_bound_check,
    phi_from_rho,
    point_mass,
    sample,
)
from .codec import compress, decompress, verify_injective, verify_lengths  # noqa: E402
from .binopt import (  # noqa: E402
    AllSubsets,
    BinDecisionInstance,
    CardinalityExact,
    ExplicitList,
    adaptive_solve,
    brute_force_decide,
    dp_solve,
    truncate,
)
from .gaps import compute_gaps, compute_index_gaps, gap_duality_exact, separating_mc  # noqa: E402
from .graphs import Graph, PerturbedGraphModel, color_decide, find_clique, perturb  # noqa: E402
from .scheme import make_scheme, run_budgeted, scheme_to_algorithm  # noqa: E402
from .steps import BudgetExceeded, StepCounter  # noqa: E402
from .harness import ExperimentConfig, run_campaign  # noqa: E402
