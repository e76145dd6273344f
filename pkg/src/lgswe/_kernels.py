"""Compiled per-point loops for point location and composed load vectors."""
import numpy as np
from numba import njit

NEEDS_SCAN = -2


@njit(cache=True)
def walk(pts, hints, centroids, grads, neighbors, tol, max_walk, elem, lam, near):
    """Neighbour walk; ``elem[i] = NEEDS_SCAN`` when the walk leaves the mesh or runs too long.

    ``lam`` receives the raw weights; ``near[i]`` flags a point within ``tol``
    of an edge of its element.
    """
    third = 1.0 / 3.0
    for i in range(pts.shape[0]):
        t = hints[i]
        elem[i] = NEEDS_SCAN
        for _ in range(max_walk):
            dx = pts[i, 0] - centroids[t, 0]
            dy = pts[i, 1] - centroids[t, 1]
            l0 = third + grads[t, 0, 0] * dx + grads[t, 0, 1] * dy
            l1 = third + grads[t, 1, 0] * dx + grads[t, 1, 1] * dy
            l2 = third + grads[t, 2, 0] * dx + grads[t, 2, 1] * dy
            k, lk = 0, l0
            if l1 < lk:
                k, lk = 1, l1
            if l2 < lk:
                k, lk = 2, l2
            if lk >= -tol:
                elem[i] = t
                near[i] = lk <= tol
                lam[i, 0] = l0
                lam[i, 1] = l1
                lam[i, 2] = l2
                break
            nb = neighbors[t, k]
            if nb < 0:
                break
            t = nb


@njit(cache=True)
def compose_scatter(field, nodes, lam, coef, P, tri, out):
    """``out[tri[t, i]] += coef[t, q] * field(foot[t, q]) * P[q, i]`` for a scalar field."""
    nt, nq = coef.shape
    for t in range(nt):
        for q in range(nq):
            v = (
                lam[t, q, 0] * field[nodes[t, q, 0]]
                + lam[t, q, 1] * field[nodes[t, q, 1]]
                + lam[t, q, 2] * field[nodes[t, q, 2]]
            )
            c = coef[t, q] * v
            for i in range(3):
                out[tri[t, i]] += c * P[q, i]


@njit(cache=True)
def compose_scatter_vec(field, nodes, lam, coef, P, tri, out):
    """Vector-valued counterpart of :func:`compose_scatter`; ``field`` and ``out`` are (Nv, d)."""
    nt, nq = coef.shape
    nd = field.shape[1]
    for t in range(nt):
        for q in range(nq):
            for d in range(nd):
                v = (
                    lam[t, q, 0] * field[nodes[t, q, 0], d]
                    + lam[t, q, 1] * field[nodes[t, q, 1], d]
                    + lam[t, q, 2] * field[nodes[t, q, 2], d]
                )
                c = coef[t, q] * v
                for i in range(3):
                    out[tri[t, i], d] += c * P[q, i]


def scatter_composed(field, nodes, lam, coef, P, tri, nv):
    field = np.ascontiguousarray(field, dtype=np.float64)
    coef = np.ascontiguousarray(coef, dtype=np.float64)
    P = np.ascontiguousarray(P, dtype=np.float64)
    if field.ndim == 1:
        out = np.zeros(nv)
        compose_scatter(field, nodes, lam, coef, P, tri, out)
    else:
        out = np.zeros((nv, field.shape[1]))
        compose_scatter_vec(field, nodes, lam, coef, P, tri, out)
    return out
