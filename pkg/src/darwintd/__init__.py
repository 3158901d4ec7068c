"""Two-step quasistatic Darwin time-domain field solver."""

from .errors import ConfigurationError, SolverError
from .fields import (
    FieldSnapshot,
    UndefinedMetricError,
    edge_field_difference,
    face_field_difference,
    recover_fields,
    relative_difference,
)
from .grid import StructuredGrid, build_curl, build_gradient, build_grid
from .materials import MaterialAssembly, MaterialRegion, assemble_materials, classify_edges
from .maxwell import PhasorSolution, solve_reference, time_sample
from .orchestrator import (
    Problem,
    RunHistory,
    Scenario,
    build_problem,
    excitation,
    run,
    run_interleaved,
    run_two_loop,
)

__all__ = [
    "ConfigurationError",
    "SolverError",
    "FieldSnapshot",
    "UndefinedMetricError",
    "StructuredGrid",
    "MaterialAssembly",
    "MaterialRegion",
    "PhasorSolution",
    "Problem",
    "RunHistory",
    "Scenario",
    "assemble_materials",
    "build_curl",
    "build_gradient",
    "build_grid",
    "build_problem",
    "classify_edges",
    "edge_field_difference",
    "excitation",
    "face_field_difference",
    "recover_fields",
    "relative_difference",
    "run",
    "run_interleaved",
    "run_two_loop",
    "solve_reference",
    "time_sample",
]

__version__ = "0.1.0"
