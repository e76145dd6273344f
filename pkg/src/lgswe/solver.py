"""Essential boundary conditions and symmetric linear solves."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import ConstraintConflict, NoConvergence, PositivityLost
from .mesh import BoundaryPartition

DEFAULT_TOL = 1e-12
# relative floor on the total height in the transmission condition
PHI_FLOOR = 1e-8


@dataclass(frozen=True)
class ConstraintSet:
    """Prescribed values on selected degrees of freedom.

    ``components`` is 0/1 for velocity unknowns and 0 for scalar ones; the
    global index is ``component * n_nodes + node``.
    """

    nodes: np.ndarray
    components: np.ndarray
    values: np.ndarray
    n_nodes: int

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=np.int64).ravel()
        comps = np.asarray(self.components, dtype=np.int64).ravel()
        vals = np.asarray(self.values, dtype=float).ravel()
        if not (len(nodes) == len(comps) == len(vals)):
            raise ValueError("constraint arrays differ in length")
        dofs = comps * self.n_nodes + nodes
        order = np.argsort(dofs, kind="stable")
        dofs, vals = dofs[order], vals[order]
        dup = np.flatnonzero(np.diff(dofs) == 0)
        if dup.size:
            if np.any(vals[dup] != vals[dup + 1]):
                k = dup[np.flatnonzero(vals[dup] != vals[dup + 1])[0]]
                raise ConstraintConflict(f"conflicting values for degree of freedom {dofs[k]}")
            keep = np.ones(len(dofs), bool)
            keep[dup + 1] = False
            dofs, vals = dofs[keep], vals[keep]
        object.__setattr__(self, "nodes", dofs % self.n_nodes)
        object.__setattr__(self, "components", dofs // self.n_nodes)
        object.__setattr__(self, "values", vals)

    @property
    def dofs(self) -> np.ndarray:
        return self.components * self.n_nodes + self.nodes

    def __len__(self):
        return len(self.values)

    @classmethod
    def empty(cls, n_nodes):
        return cls(np.zeros(0, int), np.zeros(0, int), np.zeros(0), n_nodes)


def apply_constraints(A, b, cs: ConstraintSet):
    """Symmetric elimination of the constrained unknowns.

    Columns of constrained unknowns move to the right-hand side, their rows
    and columns are zeroed and a unit diagonal is put back, so the matrix
    stays symmetric positive definite.
    """
    A = sp.csr_matrix(A)
    b = np.asarray(b, dtype=float)
    if len(cs) == 0:
        return A.copy(), b.copy()
    n = A.shape[0]
    dofs = cs.dofs
    if dofs.min() < 0 or dofs.max() >= n:
        raise IndexError("constraint index out of range")
    xc = np.zeros(n)
    xc[dofs] = cs.values
    free = np.ones(n, dtype=bool)
    free[dofs] = False
    rows = np.repeat(np.arange(n), np.diff(A.indptr))
    keep = free[rows] & free[A.indices]
    data = np.where(keep, A.data, 0.0)
    diag = np.flatnonzero((rows == A.indices) & ~free[rows])
    if len(diag) == len(dofs):
        # every constrained row stores its diagonal: keep the sparsity pattern
        data[diag] = 1.0
        A2 = sp.csr_matrix((data, A.indices.copy(), A.indptr.copy()), shape=A.shape)
    else:
        A2 = sp.csr_matrix((data, A.indices, A.indptr), shape=A.shape)
        A2 = (A2 + sp.diags((~free).astype(float))).tocsr()
    b2 = np.where(free, b - A @ xc, xc)
    return A2, b2


def solve_spd(A, b, tol=DEFAULT_TOL, maxit=None, x0=None) -> np.ndarray:
    """Jacobi-preconditioned conjugate gradients.

    Iterates until the true relative residual ``|Ax - b| / |b|`` is at most
    ``tol``; raises :class:`NoConvergence` after ``maxit`` iterations
    (default ``10 * n``).
    """
    b = np.asarray(b, dtype=float)
    n = len(b)
    maxit = 10 * n if maxit is None else maxit
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return np.zeros(n)
    diag = A.diagonal()
    if np.any(diag <= 0):
        raise ValueError("matrix is not positive definite (non-positive diagonal)")
    dinv = 1.0 / diag
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = b - A @ x
    it = 0
    target = tol * bnorm
    while True:
        z = dinv * r
        p = z.copy()
        rz = r @ z
        while it < maxit and np.linalg.norm(r) > target:
            Ap = A @ p
            alpha = rz / (p @ Ap)
            x += alpha * p
            r -= alpha * Ap
            z = dinv * r
            rz, rz_old = r @ z, rz
            p = z + (rz / rz_old) * p
            it += 1
        r = b - A @ x
        res = np.linalg.norm(r)
        if res <= target:
            return x
        if it >= maxit:
            raise NoConvergence(it, res / bnorm)


def solve_dense(A, b) -> np.ndarray:
    """Dense Cholesky solve; intended for small systems (checks and oracles)."""
    A = A.toarray() if sp.issparse(A) else np.asarray(A)
    return scipy.linalg.cho_solve(scipy.linalg.cho_factor(A), np.asarray(b, dtype=float))


def tbc_values(bp: BoundaryPartition, phi, eta, c0: float, g: float, zeta, n_nodes=None) -> ConstraintSet:
    """Velocity constraints: zero on Dirichlet nodes, ``c0 sqrt(g zeta) eta/phi n`` on transmission nodes."""
    phi = np.asarray(phi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    n_nodes = len(phi) if n_nodes is None else n_nodes
    tn = bp.tnodes
    zeta_t = np.broadcast_to(np.asarray(zeta, dtype=float), (n_nodes,))[tn]
    phi_t = phi[tn]
    low = phi_t < PHI_FLOOR * zeta_t
    if np.any(low):
        raise PositivityLost(
            f"total height {phi_t[low].min():.3e} below floor at transmission node {int(tn[low][0])}"
        )
    speed = c0 * np.sqrt(g * zeta_t) * eta[tn] / phi_t
    return velocity_constraints(bp, speed[:, None] * bp.normals, n_nodes)


def velocity_constraints(bp: BoundaryPartition, vals_t, n_nodes: int) -> ConstraintSet:
    """Zero on Dirichlet nodes and the given (len(tnodes), 2) values on transmission nodes."""
    vals_t = np.asarray(vals_t, dtype=float)
    tn = bp.tnodes
    if vals_t.shape != (len(tn), 2):
        raise ValueError(f"expected transmission values of shape ({len(tn)}, 2), got {vals_t.shape}")
    dn = bp.dirichlet_nodes
    nodes = np.concatenate([dn, dn, tn, tn])
    comps = np.concatenate([np.zeros(len(dn)), np.ones(len(dn)), np.zeros(len(tn)), np.ones(len(tn))])
    vals = np.concatenate([np.zeros(2 * len(dn)), vals_t[:, 0], vals_t[:, 1]])
    return ConstraintSet(nodes, comps, vals, n_nodes)
