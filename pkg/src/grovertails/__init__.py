"""Driven Grover walk on finite graphs with semi-infinite tails.

Build a graph, attach tails, and analyze the walk a constant inflow drives:
its stationary state, the spectrum of the internal step operator with its
explicitly constructible unit-circle eigenspace, per-tail transmission and
reflection, the Grover scattering matrix, and the Kirchhoff-style flow laws
the stationary state obeys.
"""

__version__ = "1.0.0"

from .dynamics import (
    DriveConfig,
    Trajectory,
    TruncatedEvolution,
    evolve,
    evolve_truncated,
    inflow_source,
    step,
)
from .graphs import (
    ArcSpace,
    InternalGraph,
    OrientedCycle,
    TailedGraph,
    TruncatedTails,
    arc_space,
    attach_tails,
    fundamental_cycles,
    make_graph,
    parse_edge_list,
    truncate_tails,
)
from .operators import (
    WalkOperators,
    build_operators,
    grover_matrix,
    grover_unitary,
    intertwine_residual,
    vertex_moments,
)
from .pipeline import RunConfig, RunResult, run
from .scattering import (
    ExtendedState,
    FlowLawReport,
    Outflows,
    ScatteringReport,
    StationaryState,
    build_scattering_report,
    extend_to_tails,
    scattering_matrix,
    solve_stationary,
    stationary_vertex_flux,
    transmission_reflection,
    verify_laws,
)
from .spectral import (
    CenterBasis,
    SpectralDecomposition,
    center_basis,
    check_center_span,
    eigen_classify,
)

__all__ = [
    "ArcSpace",
    "CenterBasis",
    "DriveConfig",
    "ExtendedState",
    "FlowLawReport",
    "InternalGraph",
    "OrientedCycle",
    "Outflows",
    "RunConfig",
    "RunResult",
    "ScatteringReport",
    "SpectralDecomposition",
    "StationaryState",
    "TailedGraph",
    "Trajectory",
    "TruncatedEvolution",
    "TruncatedTails",
    "WalkOperators",
    "arc_space",
    "attach_tails",
    "build_operators",
    "build_scattering_report",
    "center_basis",
    "check_center_span",
    "eigen_classify",
    "evolve",
    "evolve_truncated",
    "extend_to_tails",
    "fundamental_cycles",
    "grover_matrix",
    "grover_unitary",
    "inflow_source",
    "intertwine_residual",
    "make_graph",
    "parse_edge_list",
    "run",
    "scattering_matrix",
    "solve_stationary",
    "stationary_vertex_flux",
    "step",
    "transmission_reflection",
    "truncate_tails",
    "verify_laws",
    "vertex_moments",
]
