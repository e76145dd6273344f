"""Generate the coarse Bay of Bengal meshes shipped in ``lgswe/data``.

The outline is a hand-traced polygonal caricature of the bay inside the
box [0, 1051.4] x [0, 889.59] km: Indian coast on the west, the Bangladesh
coast with two islands in the north, the Myanmar coast on the east, and three
open-sea cuts: west (label 1), south (label 2) and east (label 3).  The
extended variant moves the southern cut 100 km further south.

Needs the ``triangle`` package (``pip install triangle``); the library itself
does not.

    python demos/make_bay_mesh.py
"""
from pathlib import Path

import numpy as np
import triangle

from lgswe.mesh import TriMesh, save_mesh

WIDTH = 1051.4
HEIGHT = 889.59
SOURCE = (559.56, 430.02)
OUT = Path(__file__).resolve().parents[1] / "src" / "lgswe" / "data"

EAST_COAST = [  # Myanmar, south to north
    (1010.0, 260.0), (985.0, 360.0), (955.0, 470.0), (930.0, 570.0),
    (905.0, 660.0), (870.0, 745.0), (830.0, 815.0), (790.0, 860.0),
]
NORTH_COAST = [  # Bangladesh, east to west
    (745.0, HEIGHT), (690.0, 870.0), (640.0, 885.0), (590.0, 860.0),
    (540.0, HEIGHT), (470.0, 875.0), (410.0, 850.0), (340.0, 830.0),
]
WEST_COAST = [  # India, north to south
    (280.0, 800.0), (230.0, 730.0), (180.0, 660.0), (130.0, 590.0),
    (80.0, 520.0), (35.0, 450.0),
]
ISLANDS = [
    [(620.0, 815.0), (665.0, 820.0), (660.0, 845.0), (625.0, 842.0)],
    [(705.0, 830.0), (735.0, 828.0), (738.0, 850.0), (710.0, 852.0)],
]
MARK = 10  # triangle reserves small markers for its own use


def outline(bottom):
    west_open_top, east_open_top = (0.0, 400.0), (WIDTH, 150.0)
    pts = [(0.0, bottom), (WIDTH, bottom), east_open_top]
    labels = [2, 3]
    coast = EAST_COAST + NORTH_COAST + WEST_COAST + [west_open_top]
    for p in coast:
        pts.append(p)
        labels.append(0)
    labels.append(1)  # west open boundary back to the start
    return pts, labels


def build(bottom, max_area=260.0, fine_area=14.0, fine_radius=80.0):
    pts, labels = outline(bottom)
    n = len(pts)
    segs = [(i, (i + 1) % n) for i in range(n)]
    marks = [lab + MARK for lab in labels]
    holes = []
    for isl in ISLANDS:
        base = len(pts)
        pts.extend(isl)
        segs.extend((base + i, base + (i + 1) % len(isl)) for i in range(len(isl)))
        marks.extend([MARK] * len(isl))
        holes.append(tuple(np.mean(isl, axis=0)))
    pts.append(SOURCE)
    # a refinement disk around the initial hump
    ang = np.linspace(0, 2 * np.pi, 40, endpoint=False)
    base = len(pts)
    ring = np.column_stack([SOURCE[0] + fine_radius * np.cos(ang), SOURCE[1] + fine_radius * np.sin(ang)])
    pts.extend(map(tuple, ring))
    segs.extend((base + i, base + (i + 1) % len(ang)) for i in range(len(ang)))
    marks.extend([1] * len(ang))  # interior segment
    geom = {
        "vertices": np.array(pts),
        "segments": np.array(segs),
        "segment_markers": np.array(marks)[:, None],
        "holes": np.array(holes),
        "regions": np.array([
            [SOURCE[0], SOURCE[1], 1, fine_area],
            [SOURCE[0], SOURCE[1] - 200.0, 2, max_area],
        ]),
    }
    out = triangle.triangulate(geom, "pq30Aae")
    verts = out["vertices"]
    tris = out["triangles"]
    # orient counter-clockwise
    d1 = verts[tris[:, 1]] - verts[tris[:, 0]]
    d2 = verts[tris[:, 2]] - verts[tris[:, 0]]
    cw = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0] < 0
    tris[cw] = tris[cw][:, [0, 2, 1]]
    edges, emarks = out["edges"], out["edge_markers"].ravel()
    bnd = emarks >= MARK
    mesh = TriMesh(verts, tris, edges[bnd], emarks[bnd] - MARK)
    return mesh


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, bottom in (("bay.smf", 0.0), ("bay_extended.smf", -100.0)):
        mesh = build(bottom)
        save_mesh(
            mesh,
            OUT / name,
            comment=(
                f"coarse Bay of Bengal outline, southern cut at y = {bottom} km\n"
                "labels: 0 coast/islands, 1 west open sea, 2 south open sea, 3 east open sea"
            ),
        )
        print(name, mesh.n_vertices, "vertices", mesh.n_triangles, "triangles", f"h = {mesh.h:.1f} km")


if __name__ == "__main__":
    main()
