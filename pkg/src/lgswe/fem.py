"""P1 finite elements: interpolation, point evaluation and assembly.

Scalar fields are arrays of shape ``(Nv,)`` and vector fields arrays of
shape ``(Nv, 2)``.  Vector unknowns enter linear systems component-blocked,
``[u1_0 .. u1_{Nv-1}, u2_0 .. u2_{Nv-1}]`` (see :func:`to_dofs`).

Callbacks are vectorised: ``fn(x)`` receives points of shape ``(M, 2)`` and
returns ``(M,)`` or ``(M, 2)``; source terms are called as ``fn(x, t)``.
"""
from __future__ import annotations

import weakref

import numpy as np
import scipy.sparse as sp

from .errors import InputError, PositivityLost
from .mesh import BaryCoord, TriMesh
from .quadrature import get_rule

# Quadrature degree per integrand; the mass matrices are closed-form.
DEGREES = {
    "weighted_vector_mass": 4,
    "b_rhs": 4,  # integrand quadratic; degree-4 rule is the smallest with positive weights above 2
    "source": 5,
    "energies": 5,
    "composed": 5,
}


def to_dofs(u: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(u).T).ravel()


def from_dofs(x: np.ndarray) -> np.ndarray:
    return np.asarray(x).reshape(2, -1).T.copy()


def interpolate(mesh: TriMesh, fn) -> np.ndarray:
    """Lagrange interpolant: ``fn`` evaluated at the vertices."""
    vals = np.asarray(fn(mesh.vertices), dtype=float)
    if vals.ndim == 0:
        vals = np.full(mesh.n_vertices, float(vals))
    if vals.shape[0] != mesh.n_vertices:
        raise InputError("interpolated function returned the wrong number of values")
    if not np.all(np.isfinite(vals)):
        raise InputError("interpolated function returned non-finite values")
    return vals


def eval_field(mesh: TriMesh, field: np.ndarray, bc: BaryCoord):
    return bc.lam @ np.asarray(field)[mesh.triangles[bc.element]]


def eval_at(mesh: TriMesh, field: np.ndarray, elements, lam) -> np.ndarray:
    """Vectorised point evaluation from (element, barycentric) pairs."""
    return eval_nodes(np.asarray(field), mesh.triangles[elements], lam)


def eval_nodes(field: np.ndarray, nodes, lam) -> np.ndarray:
    """As :func:`eval_at` with the host vertices ``nodes`` (..., 3) already gathered."""
    vals = field[nodes]  # (..., 3) or (..., 3, d)
    if vals.ndim == nodes.ndim:
        return lam[..., 0] * vals[..., 0] + lam[..., 1] * vals[..., 1] + lam[..., 2] * vals[..., 2]
    lam = lam[..., None]
    return lam[..., 0, :] * vals[..., 0, :] + lam[..., 1, :] * vals[..., 1, :] + lam[..., 2, :] * vals[..., 2, :]


def require_positive(phi: np.ndarray, what="total wave height") -> None:
    m = float(np.min(phi))
    if not m > 0:
        raise PositivityLost(f"{what} not positive (min nodal value {m:.3e})")


# --------------------------------------------------------------------------
# Sparse patterns, cached per mesh
# --------------------------------------------------------------------------

class _Pattern:
    """Maps element-matrix entries onto a fixed CSR structure."""

    def __init__(self, rows, cols, n):
        keys = rows.ravel() * n + cols.ravel()
        uniq, inv = np.unique(keys, return_inverse=True)
        self.n = n
        self.map = inv.ravel()
        self.nnz = len(uniq)
        self.indices = (uniq % n).astype(np.int32)
        counts = np.bincount(uniq // n, minlength=n)
        self.indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int32)
        # position of the transposed entry, for cheap symmetry checks
        self.tperm = np.searchsorted(uniq, (uniq % n) * n + uniq // n)

    def build(self, vals) -> sp.csr_matrix:
        data = np.bincount(self.map, weights=np.ravel(vals), minlength=self.nnz)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))


_patterns: "weakref.WeakKeyDictionary[TriMesh, dict]" = weakref.WeakKeyDictionary()


def _pattern(mesh: TriMesh, kind: str) -> _Pattern:
    cache = _patterns.setdefault(mesh, {})
    if kind not in cache:
        tri = mesh.triangles
        nv = mesh.n_vertices
        if kind == "scalar":
            rows = np.repeat(tri[:, :, None], 3, axis=2)
            cache[kind] = _Pattern(rows, np.swapaxes(rows, 1, 2), nv)
        else:
            dof = np.concatenate([tri, tri + nv], axis=1)  # local order (c, i)
            rows = np.repeat(dof[:, :, None], 6, axis=2)
            cache[kind] = _Pattern(rows, np.swapaxes(rows, 1, 2), 2 * nv)
    return cache[kind]


def _scatter(mesh: TriMesh, local: np.ndarray) -> np.ndarray:
    """Sum element load contributions ``local`` (Nt, 3[, 2]) into a nodal vector."""
    idx = mesh.triangles.ravel()
    nv = mesh.n_vertices
    if local.ndim == 2:
        return np.bincount(idx, weights=local.ravel(), minlength=nv)
    return np.column_stack(
        [np.bincount(idx, weights=local[:, :, c].ravel(), minlength=nv) for c in range(2)]
    )


# --------------------------------------------------------------------------
# Matrices
# --------------------------------------------------------------------------

_P1_MASS = (np.ones((3, 3)) + np.eye(3)) / 12.0


def assemble_mass(mesh: TriMesh) -> sp.csr_matrix:
    """Consistent P1 mass matrix (exact integration)."""
    cache = _patterns.setdefault(mesh, {})
    if "mass" not in cache:
        vals = mesh.area[:, None, None] * _P1_MASS[None]
        cache["mass"] = _pattern(mesh, "scalar").build(vals)
    return cache["mass"].copy()


def lumped_mass(mesh: TriMesh) -> np.ndarray:
    return _scatter(mesh, np.repeat(mesh.area[:, None] / 3.0, 3, axis=1))


def _weighted_local(mesh, phi, rule):
    # phi is P1, so the element matrix is linear in the three nodal values
    P = rule.points
    T = np.einsum("q,qk,qi,qj->kij", rule.weights, P, P, P).reshape(3, 9)
    local = (phi[mesh.triangles] @ T).reshape(-1, 3, 3)
    return mesh.area[:, None, None] * local


def assemble_weighted_mass(mesh: TriMesh, phi: np.ndarray) -> sp.csr_matrix:
    """Scalar matrix of ``(phi psi_j, psi_i)``."""
    phi = np.asarray(phi, dtype=float)
    local = _weighted_local(mesh, phi, get_rule(DEGREES["weighted_vector_mass"]))
    return _pattern(mesh, "scalar").build(local)


def assemble_weighted_vector_mass(mesh: TriMesh, phi: np.ndarray) -> sp.csr_matrix:
    """Block matrix of ``(phi u, v)`` on the component-blocked vector space."""
    phi = np.asarray(phi, dtype=float)
    require_positive(phi)
    local = _weighted_local(mesh, phi, get_rule(DEGREES["weighted_vector_mass"]))
    block = np.zeros((mesh.n_triangles, 6, 6))
    block[:, :3, :3] = local
    block[:, 3:, 3:] = local
    return _pattern(mesh, "vector").build(block)


_unit_viscous: "weakref.WeakKeyDictionary[TriMesh, np.ndarray]" = weakref.WeakKeyDictionary()


def _viscous_blocks(mesh, phi, mu):
    if mesh not in _unit_viscous:
        g = mesh.grads  # (Nt, 3, 2)
        gg = g @ np.swapaxes(g, 1, 2)
        K = np.empty((mesh.n_triangles, 6, 6))
        for c in range(2):
            for d in range(2):
                # (g_j)_c (g_i)_d for row (c, i), column (d, j)
                cross = g[:, :, d, None] * g[:, None, :, c]
                K[:, 3 * c : 3 * c + 3, 3 * d : 3 * d + 3] = cross + gg if c == d else cross
        _unit_viscous[mesh] = mesh.area[:, None, None] * K
    coef = mu * phi[mesh.triangles].mean(axis=1)
    return coef[:, None, None] * _unit_viscous[mesh]


def assemble_a(mesh: TriMesh, phi: np.ndarray, mu: float) -> sp.csr_matrix:
    """Viscous form ``2 mu (phi D(u), D(v))``.

    D(u) is constant per element, so the element integral is the mean nodal
    weight times a constant tensor.
    """
    phi = np.asarray(phi, dtype=float)
    require_positive(phi)
    return _pattern(mesh, "vector").build(_viscous_blocks(mesh, phi, mu))


def assemble_momentum(mesh: TriMesh, phi: np.ndarray, mass_coef: float, mu: float) -> sp.csr_matrix:
    """``mass_coef * assemble_weighted_vector_mass + assemble_a`` in a single pass."""
    phi = np.asarray(phi, dtype=float)
    require_positive(phi)
    block = _viscous_blocks(mesh, phi, mu)
    local = mass_coef * _weighted_local(mesh, phi, get_rule(DEGREES["weighted_vector_mass"]))
    block[:, :3, :3] += local
    block[:, 3:, 3:] += local
    return _pattern(mesh, "vector").build(block)


def transpose_perm(mesh: TriMesh, kind: str = "vector") -> np.ndarray:
    """Permutation of CSR data taking a matrix on the mesh pattern to its transpose."""
    return _pattern(mesh, kind).tperm


# --------------------------------------------------------------------------
# Load vectors
# --------------------------------------------------------------------------

def assemble_b_rhs(mesh: TriMesh, phi, eta, rho: float, g: float) -> np.ndarray:
    """Load vector ``rho g (phi grad(eta), psi_i e_c)``, shape (Nv, 2)."""
    rule = get_rule(DEGREES["b_rhs"])
    tri = mesh.triangles
    grad_eta = (np.asarray(eta, dtype=float)[tri][:, None, :] @ mesh.grads)[:, 0]
    phiq = np.asarray(phi, dtype=float)[tri] @ rule.points.T  # (Nt, Q)
    int_phi_psi = mesh.area[:, None] * ((rule.weights * phiq) @ rule.points)  # (Nt, 3)
    local = rho * g * int_phi_psi[:, :, None] * grad_eta[:, None, :]
    return _scatter(mesh, local)


def assemble_source(mesh: TriMesh, fn, t: float, rule=None) -> np.ndarray:
    """Load vector ``(fn(., t), psi_i)``; shape (Nv,) or (Nv, 2) following ``fn``."""
    rule = rule or get_rule(DEGREES["source"])
    xq = rule.physical_points(mesh)
    vals = np.asarray(fn(xq.reshape(-1, 2), t), dtype=float)
    if vals.ndim == 0:
        vals = np.full(xq.shape[0] * xq.shape[1], float(vals))
    w = rule.weights[None, :] * mesh.area[:, None]
    if vals.ndim == 1:
        vals = vals.reshape(xq.shape[:2])
        return _scatter(mesh, (w * vals) @ rule.points)
    vals = vals.reshape(xq.shape[0], xq.shape[1], 2)
    local = rule.points.T @ (w[:, :, None] * vals)
    return _scatter(mesh, local)


def check_symmetric(A, tol=1e-12, perm=None) -> None:
    """Assert ``max |A_ij - A_ji| <= tol * max |A|``.

    ``perm`` (see :func:`transpose_perm`) skips forming the transpose for
    matrices on a mesh pattern.
    """
    if perm is not None:
        dev = float(np.max(np.abs(A.data - A.data[perm]), initial=0.0))
        scale = float(np.max(np.abs(A.data), initial=0.0))
    else:
        diff = abs(A - A.T)
        dev = diff.max() if diff.nnz else 0.0
        scale = abs(A).max()
    if dev > tol * scale:
        raise AssertionError(f"matrix not symmetric: {dev:.3e} > {tol:.0e} * {scale:.3e}")
