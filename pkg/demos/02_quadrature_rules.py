"""The three quadrature rules and where their exactness stops.

The degree-2 tet rule combines vertices (weight -1/20) with edge midpoints
(weight 1/5); the degree-5 rule is the classical 15-point one; faces use the
3-point edge-midpoint rule.
"""

import math

import numpy as np

import anisofem as af

REF = np.array([[0., 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]])


def exact_ref_integral(a, b, c):
    return (math.factorial(a) * math.factorial(b) * math.factorial(c)
            / math.factorial(a + b + c + 3))


for rule, label in [(af.tet_rule_degree2(), "degree-2 (10 points)"),
                    (af.tet_rule_degree5(), "degree-5 (15 points)")]:
    print(f"{label}: weight sum {rule.weights.sum():+.17f}")
    print(f"{'monomial':>10} {'rule':>14} {'exact':>14} {'error':>10}")
    for a, b, c in [(0, 0, 0), (2, 0, 0), (1, 1, 1), (3, 2, 0), (5, 0, 0),
                    (6, 0, 0)]:
        got = af.integrate(rule, REF,
                           lambda x, y, z: x ** a * y ** b * z ** c)
        exact = exact_ref_integral(a, b, c)
        marker = "" if abs(got - exact) < 1e-14 else "  <- beyond the degree"
        print(f"   x^{a}y^{b}z^{c} {got:>14.3e} {exact:>14.3e} "
              f"{abs(got - exact):>10.1e}{marker}")
    print()

tri = np.array([[0., 0, 0], [1, 0, 0], [0, 1, 0]])
rule = af.tri_rule_midpoint3()
print("triangle midpoint rule on the reference face:")
for f, label, exact in [
        (lambda x, y, z: np.ones_like(x), "1", 0.5),
        (lambda x, y, z: (1 - x - y) * x, "lam1*lam2", 0.5 / 12),
        (lambda x, y, z: (1 - x - y) ** 3, "lam1^3", 0.5 / 10)]:
    got = af.integrate(rule, tri, f)
    print(f"   {label:>10}: rule {got:.6f}  exact {exact:.6f}")
