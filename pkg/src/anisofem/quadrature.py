"""Fixed quadrature rules on tetrahedra and triangles.

Rules store barycentric points and weights relative to the simplex measure
(weights sum to 1), so the same rule applies to any simplex through the affine
map.  Negative weights are allowed; the degree-2 tet rule carries -1/20 at the
vertices.
"""

import math
from dataclasses import dataclass
from itertools import combinations, permutations

import numpy as np


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray   # (n, k) barycentric coordinates, k = 3 or 4
    weights: np.ndarray  # (n,) summing to 1
    degree: int          # every polynomial up to this total degree is exact

    def __post_init__(self):
        self.points.setflags(write=False)
        self.weights.setflags(write=False)


def _orbit(coords):
    return np.array(sorted(set(permutations(coords))), dtype=float)


def tet_rule_degree2():
    """10-point rule: vertices at weight -1/20, edge midpoints at 1/5."""
    eye = np.eye(4)
    points = np.vstack([eye] + [(eye[i] + eye[j]) / 2.0
                                for i, j in combinations(range(4), 2)])
    weights = np.array([-1.0 / 20] * 4 + [1.0 / 5] * 6)
    return QuadratureRule(points, weights, degree=2)


def tet_rule_degree5():
    """The 15-point fifth-order rule of Keast.

    Orbit weights are the exact rationals recovered by moment matching, so
    the rule is as accurate as double precision allows; the monomial
    exactness tests gate any transcription slip.
    """
    s = math.sqrt(91.0) / 52.0
    groups = [
        (_orbit((0.25, 0.25, 0.25, 0.25)), 6544.0 / 36015.0),
        (_orbit((1 / 3, 1 / 3, 1 / 3, 0.0)), 81.0 / 2240.0),
        (_orbit((1 / 11, 1 / 11, 1 / 11, 8 / 11)), 161051.0 / 2304960.0),
        (_orbit((0.25 - s, 0.25 - s, 0.25 + s, 0.25 + s)), 338.0 / 5145.0),
    ]
    points = np.vstack([g for g, _ in groups])
    weights = np.concatenate([np.full(len(g), w) for g, w in groups])
    return QuadratureRule(points, weights, degree=5)


def tri_rule_midpoint3():
    """3-point edge-midpoint rule on triangles, exact to degree 2."""
    points = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
    weights = np.full(3, 1.0 / 3.0)
    return QuadratureRule(points, weights, degree=2)


def simplex_measure(vertices):
    """Volume of a tet (4 vertices) or area of a triangle embedded in R^3."""
    vertices = np.asarray(vertices, dtype=float)
    if vertices.shape == (4, 3):
        return abs(np.linalg.det(vertices[1:] - vertices[0])) / 6.0
    if vertices.shape == (3, 3):
        return 0.5 * np.linalg.norm(np.cross(vertices[1] - vertices[0],
                                             vertices[2] - vertices[0]))
    raise ValueError(f"expected (4,3) or (3,3) vertex array, got {vertices.shape}")


def integrate(rule, vertices, f):
    """Integral of ``f`` over the simplex spanned by ``vertices``.

    ``f(x, y, z)`` must accept equal-length coordinate arrays; scalar or
    vector values are fine (any trailing shape is summed with the weights).
    """
    vertices = np.asarray(vertices, dtype=float)
    if rule.points.shape[1] != len(vertices):
        raise ValueError(f"rule with {rule.points.shape[1]} barycentric "
                         f"coordinates does not fit {len(vertices)} vertices")
    measure = simplex_measure(vertices)
    if measure <= 1e-300:
        raise ValueError("degenerate simplex")
    x = rule.points @ vertices
    values = np.asarray(f(x[:, 0], x[:, 1], x[:, 2]), dtype=float)
    return measure * np.einsum("q,q...->...", rule.weights, values)
