"""Unstructured triangulations with labelled boundaries.

A :class:`TriMesh` owns vertex coordinates, counter-clockwise triangles and
the list of boundary edges with their labels.  Label ``0`` marks the
Dirichlet (no-slip) part of the boundary; labels ``1..255`` mark
transmission segments.  Element geometry (areas, P1 basis gradients) and the
triangle adjacency table are computed once at construction; the object is
read-only afterwards.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from . import _kernels
from .errors import GeometryError, MeshParseError

# Barycentric containment tolerance (dimensionless).
BARY_TOL = 1e-10
DIRICHLET = 0

SIDES = ("bottom", "right", "top", "left")


@dataclass(frozen=True)
class BaryCoord:
    element: int
    lam: np.ndarray


@dataclass(frozen=True, eq=False)
class TriMesh:
    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    boundary_labels: np.ndarray
    # representative mesh size for time-step protocols (defaults to h)
    h_nominal: float | None = None

    area: np.ndarray = field(init=False, repr=False)
    grads: np.ndarray = field(init=False, repr=False)
    centroids: np.ndarray = field(init=False, repr=False)
    neighbors: np.ndarray = field(init=False, repr=False)
    h: float = field(init=False)

    def __post_init__(self):
        set_ = object.__setattr__
        verts = np.ascontiguousarray(self.vertices, dtype=float).reshape(-1, 2)
        tris = np.ascontiguousarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        bedges = np.ascontiguousarray(self.boundary_edges, dtype=np.int64).reshape(-1, 2)
        labels = np.ascontiguousarray(self.boundary_labels, dtype=np.int64).reshape(-1)
        if len(labels) != len(bedges):
            raise GeometryError("boundary label count does not match edge count")
        nv = len(verts)
        if len(tris) == 0:
            raise GeometryError("mesh has no triangles")
        if tris.min() < 0 or tris.max() >= nv or (len(bedges) and (bedges.min() < 0 or bedges.max() >= nv)):
            raise GeometryError("vertex index out of range")
        if len(labels) and (labels.min() < 0 or labels.max() > 255):
            raise GeometryError("boundary labels must lie in 0..255")

        p0, p1, p2 = verts[tris[:, 0]], verts[tris[:, 1]], verts[tris[:, 2]]
        d1, d2 = p1 - p0, p2 - p0
        area = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
        bad = np.flatnonzero(area <= 0)
        if bad.size:
            raise GeometryError(
                f"{bad.size} triangle(s) with non-positive signed area (first: {bad[0]})"
            )
        # grad of lambda_k = rot(edge opposite k) / (2 area), pointing inward
        grads = np.empty((len(tris), 3, 2))
        for k in range(3):
            a = verts[tris[:, (k + 1) % 3]]
            b = verts[tris[:, (k + 2) % 3]]
            e = b - a
            grads[:, k, 0] = -e[:, 1] / (2 * area)
            grads[:, k, 1] = e[:, 0] / (2 * area)
        diam = np.max(
            np.stack([np.hypot(*(p1 - p0).T), np.hypot(*(p2 - p1).T), np.hypot(*(p0 - p2).T)]),
            axis=0,
        )

        neighbors, boundary_keys = _adjacency(tris, nv)
        given = np.sort(bedges, axis=1)
        given_keys = given[:, 0] * nv + given[:, 1]
        if len(np.unique(given_keys)) != len(given_keys):
            raise GeometryError("duplicate boundary edge")
        if not np.array_equal(np.sort(given_keys), np.sort(boundary_keys)):
            missing = np.setdiff1d(boundary_keys, given_keys).size
            dangling = np.setdiff1d(given_keys, boundary_keys).size
            raise GeometryError(
                f"boundary edges do not cover the topological boundary "
                f"({missing} missing, {dangling} dangling)"
            )

        for name, arr in (
            ("vertices", verts),
            ("triangles", tris),
            ("boundary_edges", bedges),
            ("boundary_labels", labels),
            ("area", area),
            ("grads", grads),
            ("centroids", (p0 + p1 + p2) / 3.0),
            ("neighbors", neighbors),
        ):
            arr.flags.writeable = False
            set_(self, name, arr)
        set_(self, "h", float(diam.max()))
        if self.h_nominal is None:
            set_(self, "h_nominal", self.h)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def total_area(self) -> float:
        return float(self.area.sum())

    @cached_property
    def boundary_owner(self) -> np.ndarray:
        """Owning triangle and local edge index of each boundary edge, shape (Nb, 2)."""
        nv = self.n_vertices
        tris = self.triangles
        keys = []
        for k in range(3):
            a, b = tris[:, (k + 1) % 3], tris[:, (k + 2) % 3]
            keys.append(np.minimum(a, b) * nv + np.maximum(a, b))
        keys = np.stack(keys, axis=1)
        open_edge = self.neighbors < 0
        t_idx, k_idx = np.nonzero(open_edge)
        lookup = dict(zip(keys[t_idx, k_idx].tolist(), zip(t_idx.tolist(), k_idx.tolist())))
        be = np.sort(self.boundary_edges, axis=1)
        return np.array([lookup[int(i) * nv + int(j)] for i, j in be], dtype=np.int64).reshape(-1, 2)

    @cached_property
    def boundary_edges_ccw(self) -> np.ndarray:
        """Boundary edges re-oriented so the domain lies to their left."""
        t, k = self.boundary_owner.T
        tris = self.triangles
        return np.stack([tris[t, (k + 1) % 3], tris[t, (k + 2) % 3]], axis=1)

    @cached_property
    def vertex_triangles(self) -> list[np.ndarray]:
        flat = self.triangles.ravel()
        order = np.argsort(flat, kind="stable")
        counts = np.bincount(flat, minlength=self.n_vertices)
        return np.split(order // 3, np.cumsum(counts)[:-1])

    @cached_property
    def _centroid_tree(self):
        return cKDTree(self.centroids)

    def barycentric(self, elements, points) -> np.ndarray:
        """Barycentric weights of ``points`` with respect to ``elements`` (no containment check)."""
        elements = np.asarray(elements)
        d = np.asarray(points, dtype=float) - self.centroids[elements]
        g = self.grads[elements]
        # written out: batched 3x2 products are slow through matmul
        return 1.0 / 3.0 + g[..., 0] * d[..., 0, None] + g[..., 1] * d[..., 1, None]

    def relabel(self, mapping: dict[int, int]) -> "TriMesh":
        """Copy of the mesh with boundary labels remapped (e.g. ``{2: 0}`` demotes segment 2)."""
        labels = self.boundary_labels.copy()
        for old, new in mapping.items():
            labels[self.boundary_labels == old] = new
        return TriMesh(self.vertices, self.triangles, self.boundary_edges, labels, self.h_nominal)


def _adjacency(tris, nv):
    nt = len(tris)
    a = np.concatenate([tris[:, 1], tris[:, 2], tris[:, 0]])
    b = np.concatenate([tris[:, 2], tris[:, 0], tris[:, 1]])
    keys = np.minimum(a, b) * nv + np.maximum(a, b)
    owner = np.tile(np.arange(nt), 3)
    local = np.repeat(np.arange(3), nt)
    order = np.argsort(keys, kind="stable")
    ks = keys[order]
    uniq, start, counts = np.unique(ks, return_index=True, return_counts=True)
    if counts.max() > 2:
        raise GeometryError("non-manifold edge shared by more than two triangles")
    neighbors = np.full((nt, 3), -1, dtype=np.int64)
    pair = start[counts == 2]
    i, j = order[pair], order[pair + 1]
    neighbors[owner[i], local[i]] = owner[j]
    neighbors[owner[j], local[j]] = owner[i]
    return neighbors, uniq[counts == 1]


# --------------------------------------------------------------------------
# SMF file format
# --------------------------------------------------------------------------

def _strip(lines):
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if line:
            yield line


def load_mesh(path) -> TriMesh:
    text = Path(path).read_text()
    lines = list(_strip(text.splitlines()))
    if not lines or lines[0].split() != ["smf", "1"]:
        raise MeshParseError(f"{path}: missing 'smf 1' header")
    pos = 1
    blocks = {}
    for name, ncols, dtype in (
        ("vertices", 2, float),
        ("triangles", 3, np.int64),
        ("boundary_edges", 3, np.int64),
    ):
        if pos >= len(lines):
            raise MeshParseError(f"{path}: missing '{name}' section")
        head = lines[pos].split()
        if len(head) != 2 or head[0] != name:
            raise MeshParseError(f"{path}: expected '{name} <count>', got {lines[pos]!r}")
        try:
            count = int(head[1])
        except ValueError:
            raise MeshParseError(f"{path}: bad count in {lines[pos]!r}") from None
        rows = lines[pos + 1 : pos + 1 + count]
        if len(rows) != count:
            raise MeshParseError(f"{path}: '{name}' section truncated")
        try:
            data = np.array([[dtype(tok) for tok in r.split()] for r in rows], dtype=dtype)
        except ValueError as exc:
            raise MeshParseError(f"{path}: bad entry in '{name}': {exc}") from None
        if count and data.shape != (count, ncols):
            raise MeshParseError(f"{path}: '{name}' rows must have {ncols} columns")
        blocks[name] = data.reshape(count, ncols)
        pos += 1 + count
    if pos != len(lines):
        raise MeshParseError(f"{path}: trailing content after boundary_edges")
    be = blocks["boundary_edges"]
    return TriMesh(blocks["vertices"], blocks["triangles"], be[:, :2], be[:, 2])


def save_mesh(mesh: TriMesh, path, comment: str | None = None) -> None:
    out = ["smf 1"]
    if comment:
        out.extend(f"# {c}" for c in comment.splitlines())
    out.append(f"vertices {mesh.n_vertices}")
    out.extend(f"{x!r} {y!r}" for x, y in mesh.vertices.tolist())
    out.append(f"triangles {mesh.n_triangles}")
    out.extend("%d %d %d" % tuple(t) for t in mesh.triangles.tolist())
    out.append(f"boundary_edges {len(mesh.boundary_edges)}")
    out.extend(
        "%d %d %d" % (i, j, lab)
        for (i, j), lab in zip(mesh.boundary_edges.tolist(), mesh.boundary_labels.tolist())
    )
    Path(path).write_text("\n".join(out) + "\n")


# --------------------------------------------------------------------------
# Structured square meshes
# --------------------------------------------------------------------------

def gen_square_mesh(side_length=1.0, N=8, perturbation=0.0, side_labels=None, seed=0) -> TriMesh:
    """Square ``(0, L)^2`` split into ``N x N`` cells, each cut along its (1, 1) diagonal.

    Interior vertices are displaced by a seeded random offset of length at
    most ``perturbation * L / N``; boundary vertices stay put.  ``side_labels``
    maps ``"bottom" | "right" | "top" | "left"`` to boundary labels (default 0).
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    if not 0.0 <= perturbation <= 0.3:
        raise ValueError("perturbation must lie in [0, 0.3]")
    side_labels = dict(side_labels or {})
    unknown = set(side_labels) - set(SIDES)
    if unknown:
        raise ValueError(f"unknown side(s) {sorted(unknown)}")
    L = float(side_length)
    dx = L / N
    xs = np.linspace(0.0, L, N + 1)
    X, Y = np.meshgrid(xs, xs)  # row j = y index
    verts = np.column_stack([X.ravel(), Y.ravel()])
    idx = np.arange((N + 1) ** 2).reshape(N + 1, N + 1)

    if perturbation > 0:
        rng = np.random.default_rng(seed)
        interior = idx[1:-1, 1:-1].ravel()
        r = perturbation * dx * rng.random(interior.size)
        theta = 2 * np.pi * rng.random(interior.size)
        verts[interior] += np.column_stack([r * np.cos(theta), r * np.sin(theta)])

    v00 = idx[:-1, :-1].ravel()
    v10 = idx[:-1, 1:].ravel()
    v01 = idx[1:, :-1].ravel()
    v11 = idx[1:, 1:].ravel()
    tris = np.empty((2 * N * N, 3), dtype=np.int64)
    tris[0::2] = np.column_stack([v00, v10, v11])
    tris[1::2] = np.column_stack([v00, v11, v01])

    edges, labels = [], []
    sides = {
        "bottom": idx[0, :],
        "right": idx[:, -1],
        "top": idx[-1, ::-1],
        "left": idx[::-1, 0],
    }
    for name in SIDES:
        line = sides[name]
        edges.append(np.column_stack([line[:-1], line[1:]]))
        labels.append(np.full(N, side_labels.get(name, DIRICHLET)))
    return TriMesh(verts, tris, np.vstack(edges), np.concatenate(labels), h_nominal=dx)


# --------------------------------------------------------------------------
# Point location
# --------------------------------------------------------------------------

def _brute_force(mesh, pts, tol):
    out = np.full(len(pts), -1, dtype=np.int64)
    chunk = max(1, 200_000 // max(mesh.n_triangles, 1))
    for s in range(0, len(pts), chunk):
        p = pts[s : s + chunk]
        d = p[:, None, :] - mesh.centroids[None, :, :]
        lam = 1.0 / 3.0 + np.einsum("tkd,mtd->mtk", mesh.grads, d)
        inside = lam.min(axis=2) >= -tol
        hit = inside.any(axis=1)
        out[s : s + chunk][hit] = np.argmax(inside[hit], axis=1)
    return out


def _lowest_index_owner(mesh, elem, x, tol):
    cand = np.unique(np.concatenate([mesh.vertex_triangles[v] for v in mesh.triangles[elem]]))
    lam = mesh.barycentric(cand, np.broadcast_to(x, (len(cand), 2)))
    ok = cand[lam.min(axis=1) >= -tol]
    return int(ok.min()) if ok.size else elem


def locate_points(mesh: TriMesh, points, hints=None, tol=BARY_TOL):
    """Vectorized point location.

    Returns ``(elements, lam)``; ``elements[i] == -1`` marks a point outside
    the closed domain.  Each point walks from its hint element towards the
    neighbour across the edge with the most negative barycentric weight.
    Walks that leave through the boundary (possible in non-convex domains)
    or run too long fall back to an exhaustive scan.  Points on shared
    edges or vertices are assigned to the lowest-index containing element.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    m = len(pts)
    if hints is None:
        _, cur = mesh._centroid_tree.query(pts)
        cur = np.asarray(cur, dtype=np.int64)
    else:
        cur = np.array(np.broadcast_to(hints, (m,)), dtype=np.int64)
    elem = np.empty(m, dtype=np.int64)
    lam = np.zeros((m, 3))
    near = np.zeros(m, dtype=bool)
    max_walk = 50 + 4 * int(np.sqrt(mesh.n_triangles))
    _kernels.walk(pts, cur, mesh.centroids, mesh.grads, mesh.neighbors, float(tol), max_walk, elem, lam, near)
    pending = np.flatnonzero(elem == _kernels.NEEDS_SCAN)
    if pending.size:
        found = _brute_force(mesh, pts[pending], tol)
        elem[pending] = found
        ok = found >= 0
        lam[pending[ok]] = mesh.barycentric(found[ok], pts[pending[ok]])
        lmin = lam[pending].min(axis=1)
        near[pending] = ok & (lmin <= tol)

    # clamp roundoff below zero; only points near an edge can need it
    fix = np.flatnonzero(near)
    for i in fix:
        e = _lowest_index_owner(mesh, elem[i], pts[i], tol)
        if e != elem[i]:
            elem[i] = e
            lam[i] = mesh.barycentric(e, pts[i])
    if fix.size:
        sub = np.clip(lam[fix], 0.0, None)
        lam[fix] = sub / sub.sum(axis=1, keepdims=True)
    lam[elem < 0] = 0.0
    return elem, lam


def locate_point(mesh: TriMesh, x, hint=None) -> BaryCoord | None:
    """Containing element and barycentric weights of ``x``; ``None`` if outside."""
    elem, lam = locate_points(mesh, np.asarray(x, dtype=float)[None, :], None if hint is None else [hint])
    if elem[0] < 0:
        return None
    return BaryCoord(int(elem[0]), lam[0])


# --------------------------------------------------------------------------
# Clipping of segments that leave the domain
# --------------------------------------------------------------------------

def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def first_boundary_hit(mesh: TriMesh, x_from, x_to):
    """Smallest segment parameter s in [0, 1] at which ``x_from + s (x_to - x_from)`` meets the boundary.

    Returns ``np.inf`` where the segment does not meet the boundary.
    """
    p = np.asarray(x_from, dtype=float).reshape(-1, 2)
    r = np.asarray(x_to, dtype=float).reshape(-1, 2) - p
    q = mesh.vertices[mesh.boundary_edges[:, 0]]
    w = mesh.vertices[mesh.boundary_edges[:, 1]] - q
    s_min = np.full(len(p), np.inf)
    chunk = max(1, 400_000 // max(len(q), 1))
    eps = 1e-12
    for s0 in range(0, len(p), chunk):
        pp, rr = p[s0 : s0 + chunk, None, :], r[s0 : s0 + chunk, None, :]
        denom = _cross(rr, w[None])
        qp = q[None] - pp
        with np.errstate(divide="ignore", invalid="ignore"):
            s = _cross(qp, w[None]) / denom
            t = _cross(qp, rr) / denom
        hit = (np.abs(denom) > 0) & (s >= -eps) & (s <= 1 + eps) & (t >= -eps) & (t <= 1 + eps)
        s = np.where(hit, np.clip(s, 0.0, 1.0), np.inf)
        s_min[s0 : s0 + chunk] = s.min(axis=1)
    return s_min


def clip_segments(mesh: TriMesh, x_from, x_to):
    """Vectorized :func:`clip_to_boundary` for segments whose end is known to be outside."""
    p = np.asarray(x_from, dtype=float).reshape(-1, 2)
    r = np.asarray(x_to, dtype=float).reshape(-1, 2) - p
    length = np.hypot(r[:, 0], r[:, 1])
    s = first_boundary_hit(mesh, p, p + r)
    s = np.where(np.isfinite(s), s, 0.0)
    nudge = np.divide(1e-12 * mesh.h, length, out=np.zeros_like(length), where=length > 0)
    s = np.clip(s - nudge, 0.0, 1.0)
    return p + s[:, None] * r


def clip_to_boundary(mesh: TriMesh, x_from, x_to) -> np.ndarray:
    """``x_to`` if it lies in the closed domain, else the first boundary crossing of the segment.

    The crossing point is pulled back towards ``x_from`` by ``1e-12 * h``.
    """
    x_to = np.asarray(x_to, dtype=float)
    if locate_point(mesh, x_to) is not None:
        return x_to.copy()
    return clip_segments(mesh, np.asarray(x_from, dtype=float)[None], x_to[None])[0]


# --------------------------------------------------------------------------
# Boundary partition and nodal normals
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryPartition:
    dirichlet_nodes: np.ndarray
    transmission_nodes: dict
    # union of all transmission nodes (sorted) and their unit normals
    tnodes: np.ndarray
    normals: np.ndarray

    @property
    def node_normals(self) -> dict:
        return {int(n): v for n, v in zip(self.tnodes, self.normals)}


def compute_boundary_normals(mesh: TriMesh) -> BoundaryPartition:
    edges = mesh.boundary_edges_ccw
    labels = mesh.boundary_labels
    dirichlet = np.unique(edges[labels == DIRICHLET])
    trans = {}
    for lab in np.unique(labels[labels != DIRICHLET]):
        nodes = np.unique(edges[labels == lab])
        trans[int(lab)] = np.setdiff1d(nodes, dirichlet)
    t_edges = edges[labels != DIRICHLET]
    tnodes = np.setdiff1d(np.unique(t_edges), dirichlet)

    acc = np.zeros((mesh.n_vertices, 2))
    if len(t_edges):
        e = mesh.vertices[t_edges[:, 1]] - mesh.vertices[t_edges[:, 0]]
        # length-weighted outward normal = edge vector rotated by -90 degrees
        n = np.column_stack([e[:, 1], -e[:, 0]])
        np.add.at(acc, t_edges[:, 0], n)
        np.add.at(acc, t_edges[:, 1], n)
    normals = acc[tnodes]
    norm = np.hypot(normals[:, 0], normals[:, 1])
    scale = np.abs(acc[tnodes]).max(initial=0.0)
    degenerate = norm <= 1e-12 * max(scale, 1.0) if len(tnodes) else np.zeros(0, bool)
    if np.any(degenerate):
        raise GeometryError(f"degenerate boundary normal at node {int(tnodes[degenerate][0])}")
    normals = normals / norm[:, None] if len(tnodes) else np.zeros((0, 2))
    return BoundaryPartition(dirichlet, trans, tnodes, normals)
