"""Symmetric quadrature rules on triangles.

Rules are stored in barycentric form with weights summing to one; the caller
multiplies by the element area.  Every rule is checked against exact monomial
integrals over the reference triangle when the module is imported.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial, sqrt

import numpy as np


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray  # (Q, 3) barycentric coordinates
    weights: np.ndarray  # (Q,)
    degree: int

    def __len__(self):
        return len(self.weights)

    def physical_points(self, mesh) -> np.ndarray:
        """Quadrature points of every element, shape (Nt, Q, 2)."""
        corners = mesh.vertices[mesh.triangles]  # (Nt, 3, 2)
        return self.points @ corners


def _orbit(a):
    """The three permutations of (a, b, b) with b = (1 - a) / 2."""
    b = 0.5 * (1.0 - a)
    return [(a, b, b), (b, a, b), (b, b, a)]


def _rule(groups, degree):
    pts, wts = [], []
    for weight, orbit in groups:
        pts.extend(orbit)
        wts.extend([weight] * len(orbit))
    return QuadratureRule(np.array(pts, dtype=float), np.array(wts, dtype=float), degree)


_S15 = sqrt(15.0)

RULES = {
    1: _rule([(1.0, [(1 / 3, 1 / 3, 1 / 3)])], 1),
    2: _rule([(1 / 3, _orbit(2 / 3))], 2),
    # Dunavant degree 4, six points
    4: _rule(
        [
            (0.223381589678011, _orbit(0.108103018168070)),
            (0.109951743655322, _orbit(0.816847572980459)),
        ],
        4,
    ),
    # Radon's seven-point degree-5 rule
    5: _rule(
        [
            (9 / 40, [(1 / 3, 1 / 3, 1 / 3)]),
            ((155 + _S15) / 1200, _orbit((9 - 2 * _S15) / 21)),
            ((155 - _S15) / 1200, _orbit((9 + 2 * _S15) / 21)),
        ],
        5,
    ),
}


def get_rule(degree: int) -> QuadratureRule:
    """Smallest stored rule that is exact for polynomials of ``degree``."""
    for d in sorted(RULES):
        if d >= degree:
            return RULES[d]
    raise ValueError(f"no rule of degree {degree}")


def collapsed_gauss_rule(n: int) -> QuadratureRule:
    """Conical-product Gauss rule with n*n points, exact to degree 2n - 2.

    Built from Gauss-Legendre nodes through the Duffy map; used as an
    independent high-order reference in tests.
    """
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    u, v = np.meshgrid(x, x, indexing="ij")
    wu, wv = np.meshgrid(w, w, indexing="ij")
    l1 = u.ravel()
    l2 = (v * (1.0 - u)).ravel()
    weight = 2.0 * (wu * wv * (1.0 - u)).ravel()  # normalised by reference area 1/2
    pts = np.column_stack([1.0 - l1 - l2, l1, l2])
    return QuadratureRule(pts, weight, 2 * n - 2)


def monomial_integral(a: int, b: int) -> float:
    """Exact integral of x^a y^b over the unit right triangle divided by its area."""
    return 2.0 * factorial(a) * factorial(b) / factorial(a + b + 2)


def check_rule(rule: QuadratureRule, tol=1e-13) -> float:
    """Largest monomial error of ``rule`` up to its degree; raises if above ``tol``."""
    if np.any(rule.weights <= 0) or abs(rule.weights.sum() - 1.0) > tol:
        raise AssertionError("quadrature weights must be positive and sum to one")
    x, y = rule.points[:, 1], rule.points[:, 2]
    worst = 0.0
    for a in range(rule.degree + 1):
        for b in range(rule.degree + 1 - a):
            err = abs(rule.weights @ (x**a * y**b) - monomial_integral(a, b))
            worst = max(worst, err)
    if worst > tol:
        raise AssertionError(f"degree-{rule.degree} rule fails monomial check ({worst:.2e})")
    return worst


for _r in RULES.values():
    check_rule(_r)
