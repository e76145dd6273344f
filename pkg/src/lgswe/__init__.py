"""Two-step Lagrange-Galerkin finite elements for the 2D shallow water equations."""
from .errors import (
    ConstraintConflict,
    GeometryError,
    InputError,
    LgsweError,
    MeshParseError,
    NoConvergence,
    PositivityLost,
)
from .mesh import TriMesh, compute_boundary_normals, gen_square_mesh, load_mesh, locate_point, save_mesh
from .scenarios import build_scenario, scenario_case, sweep_c0
from .scheme import SweParams, SweState, init_state, run, step

__version__ = "0.1.0"
