"""Output files: legacy VTK snapshots and the run record."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .fem import DEGREES
from .solver import PHI_FLOOR


def write_vtk(path, mesh, eta, u, title="lgswe snapshot") -> None:
    """Legacy ASCII unstructured grid with point data ``eta`` (scalar) and ``u`` (vector)."""
    eta = np.asarray(eta, dtype=float)
    u = np.asarray(u, dtype=float)
    nv, nt = mesh.n_vertices, mesh.n_triangles
    lines = ["# vtk DataFile Version 3.0", title.replace("\n", " ")[:255], "ASCII", "DATASET UNSTRUCTURED_GRID"]
    lines.append(f"POINTS {nv} double")
    lines.extend(f"{x!r} {y!r} 0" for x, y in mesh.vertices.tolist())
    lines.append(f"CELLS {nt} {4 * nt}")
    lines.extend(f"3 {a} {b} {c}" for a, b, c in mesh.triangles.tolist())
    lines.append(f"CELL_TYPES {nt}")
    lines.extend(["5"] * nt)
    lines.append(f"POINT_DATA {nv}")
    lines.append("SCALARS eta double 1")
    lines.append("LOOKUP_TABLE default")
    lines.extend(repr(v) for v in eta.tolist())
    lines.append("VECTORS u double")
    lines.extend(f"{a!r} {b!r} 0" for a, b in u.tolist())
    Path(path).write_text("\n".join(lines) + "\n")


def snapshot_name(step: int) -> str:
    return f"snap_{step:06d}.vtk"


class SnapshotWriter:
    """Observer writing a VTK file at step 0 and every ``every`` steps."""

    def __init__(self, mesh, out_dir, every: int):
        if every <= 0:
            raise ValueError("snapshot interval must be positive")
        self.mesh = mesh
        self.out_dir = Path(out_dir)
        self.every = int(every)
        self.written: list[Path] = []

    def __call__(self, state):
        if state.n % self.every:
            return
        path = self.out_dir / snapshot_name(state.n)
        write_vtk(path, self.mesh, state.eta, state.u, title=f"t = {state.t!r} step {state.n}")
        self.written.append(path)


def design_metadata(params) -> dict:
    """Choices baked into the discretisation, recorded with every run."""
    return {
        "scheme": "LG2" if params.order == 2 else "LG1",
        "order": params.order,
        "bootstrap": "first step single-step (LG1) operators",
        "quadrature_degrees": dict(DEGREES),
        "mass_matrix": "consistent (no lumping)",
        "clipping_policy": "feet outside the domain are moved to the first boundary crossing; Jacobian kept",
        "jacobian": "det(I - s dt grad w) on the source element",
        "transmission_condition": (
            "nodal values c0 sqrt(g zeta) eta/phi n at transmission nodes; mixed corners Dirichlet"
            if params.boundary_velocity is None
            else "prescribed velocity (exact trace) at transmission nodes; mixed corners Dirichlet"
        ),
        "linear_solver": "Jacobi-preconditioned conjugate gradients",
        "solver_tol": params.solver_tol,
        "phi_floor": PHI_FLOOR,
    }


def params_dict(params) -> dict:
    out = {k: getattr(params, k) for k in ("rho", "mu", "g", "zeta", "c0", "dt", "T", "order", "solver_tol")}
    out["n_steps"] = params.n_steps
    out["forcing"] = params.f is not None or params.F is not None
    return out


def write_run_json(path, record: dict) -> None:
    """Sorted keys and no timestamps, so reruns produce identical files."""
    Path(path).write_text(json.dumps(record, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")
