"""SINR feasibility and power balancing for interfering multicast sessions.

A target SINR vector is achievable without power limits iff the largest
Perron-Frobenius eigenvalue over the embedded single-receiver systems stays
below 1; with linear power caps the same test runs on cap-shifted matrices.
The package decides these questions spectrally and by an independent LP
oracle, computes boundary points of the feasible region iteratively, and
probes the region's geometry.
"""

from .balancer import (
    ConstrainedSolveReport,
    SolveReport,
    power_balance,
    solve_beta,
    solve_beta_constrained,
    write_beta_trace,
)
from .feasibility import (
    BOUNDARY,
    BOUNDARY_BAND,
    ConstraintSet,
    FEASIBLE,
    INFEASIBLE,
    LpOracleError,
    PowerCap,
    Verdict,
    check_constrained,
    check_unconstrained,
    constraints_from_list,
    cross_slack_product,
    lp_oracle,
    power_reduce,
    psi,
    sinr_slack,
    two_session_radius,
)
from .model import (
    CoefficientSystem,
    NetworkModel,
    SelectionCapError,
    coefficient_system,
    embedded_system,
    enumerate_selections,
    interference_matrix,
    interference_stack,
    load_network,
    network_from_dict,
    network_to_dict,
    per_receiver_sinr,
    session_sinr,
)
from .region import (
    BoundaryPoint,
    MidpointCounterexample,
    ProbeReport,
    ZeroOutageInstance,
    direction_fan,
    emit_region_csv,
    infeasible_convexity_probe,
    log_convexity_probe,
    midpoint_search,
    per_embedded_betas,
    trace_boundary,
    zero_outage_map,
)
from .spectral import (
    NoConvergenceError,
    NotIrreducibleError,
    SpectralResult,
    is_irreducible,
    is_primitive,
    max_spectral_radius_bruteforce,
    primitive_set_sufficient,
    spectral_radius,
)

__version__ = "0.1.0"
