"""Characteristic feet and the composed-function right-hand sides.

For a P1 velocity ``v`` and a step count ``s`` (1 or 2), every quadrature
point ``x`` of every element is traced back to ``x - s*dt*v(x)``.  The
Jacobian ``det(I - s*dt*grad v)`` is constant per element because ``grad v``
is.  Feet leaving the domain are pulled back onto the first boundary
crossing of the segment from ``x``; the Jacobian is left untouched.
"""
from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np

from .errors import LgsweError
from ._kernels import scatter_composed
from .fem import DEGREES, eval_nodes, require_positive
from .mesh import TriMesh, clip_segments, locate_points
from .quadrature import QuadratureRule, get_rule


@dataclass(frozen=True)
class FootTable:
    steps: int
    dt: float
    rule: QuadratureRule
    feet: np.ndarray  # (Nt, Q, 2), after clipping
    elements: np.ndarray  # (Nt, Q) host element of each foot
    lam: np.ndarray  # (Nt, Q, 3) barycentric weights in the host element
    gamma: np.ndarray  # (Nt,) Jacobian on the source element
    clipped: np.ndarray  # (Nt, Q) bool
    nodes: np.ndarray  # (Nt, Q, 3) vertices of the host element

    def compose(self, field) -> np.ndarray:
        """Values of a P1 field at the feet, shape (Nt, Q[, d])."""
        return eval_nodes(np.asarray(field, dtype=float), self.nodes, self.lam)

    @property
    def n_clipped(self) -> int:
        return int(self.clipped.sum())


def extrapolate_velocity(u_prev: np.ndarray, u_prev2: np.ndarray) -> np.ndarray:
    """Second-order extrapolation ``2 u^{n-1} - u^{n-2}``."""
    return 2.0 * np.asarray(u_prev) - np.asarray(u_prev2)


_qpoints: "weakref.WeakKeyDictionary[TriMesh, dict]" = weakref.WeakKeyDictionary()


def _quad_points(mesh, rule):
    cache = _qpoints.setdefault(mesh, {})
    key = id(rule)
    if key not in cache:
        cache[key] = rule.physical_points(mesh)
    return cache[key]


def velocity_gradient(mesh: TriMesh, v: np.ndarray) -> np.ndarray:
    """Elementwise gradient ``G[t, c, d] = d v_c / d x_d``."""
    return np.swapaxes(np.asarray(v)[mesh.triangles], 1, 2) @ mesh.grads


def build_foot_table(mesh: TriMesh, v, dt: float, steps: int = 1, quad: QuadratureRule | None = None) -> FootTable:
    if dt <= 0:
        raise ValueError("dt must be positive")
    if steps not in (1, 2):
        raise ValueError("steps must be 1 or 2")
    rule = quad or get_rule(DEGREES["composed"])
    v = np.asarray(v, dtype=float)
    nt, nq = mesh.n_triangles, len(rule)
    xq = _quad_points(mesh, rule)
    vq = rule.points @ v[mesh.triangles]
    feet = (xq - steps * dt * vq).reshape(-1, 2)
    hints = np.repeat(np.arange(nt), nq)
    elem, lam = locate_points(mesh, feet, hints)

    clipped = elem < 0
    if clipped.any():
        src = xq.reshape(-1, 2)[clipped]
        new = clip_segments(mesh, src, feet[clipped])
        e2, l2 = locate_points(mesh, new, hints[clipped])
        lost = e2 < 0
        if lost.any():
            # roundoff at the crossing: fall back to the source point
            new[lost] = src[lost]
            e2[lost], l2[lost] = locate_points(mesh, new[lost], hints[clipped][lost])
            if np.any(e2 < 0):
                raise LgsweError("characteristic foot could not be located after clipping")
        feet[clipped], elem[clipped], lam[clipped] = new, e2, l2

    G = velocity_gradient(mesh, v)
    J = np.eye(2)[None] - steps * dt * G
    gamma = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
    return FootTable(
        steps=steps,
        dt=dt,
        rule=rule,
        feet=feet.reshape(nt, nq, 2),
        elements=elem.reshape(nt, nq),
        lam=lam.reshape(nt, nq, 3),
        gamma=gamma,
        clipped=clipped.reshape(nt, nq),
        nodes=mesh.triangles[elem].reshape(nt, nq, 3),
    )


def rhs_conservative(mesh: TriMesh, phi_prev, feet: FootTable) -> np.ndarray:
    """Load vector ``(gamma * phi_prev(foot), psi_i)`` evaluated with the foot table's rule."""
    rule = feet.rule
    coef = (mesh.area * feet.gamma)[:, None] * rule.weights[None, :]
    return scatter_composed(phi_prev, feet.nodes, feet.lam, coef, rule.points, mesh.triangles, mesh.n_vertices)


def rhs_nonconservative(mesh: TriMesh, u_prev, phi_weight, feet: FootTable) -> np.ndarray:
    """Load vector ``(phi_weight * u_prev(foot), psi_i e_c)``, shape (Nv, 2).

    The weight is evaluated at the source point; no Jacobian enters.  The
    density factor is left to the caller.
    """
    phi_weight = np.asarray(phi_weight, dtype=float)
    require_positive(phi_weight)
    rule = feet.rule
    phiq = phi_weight[mesh.triangles] @ rule.points.T
    coef = mesh.area[:, None] * rule.weights[None, :] * phiq
    return scatter_composed(u_prev, feet.nodes, feet.lam, coef, rule.points, mesh.triangles, mesh.n_vertices)
