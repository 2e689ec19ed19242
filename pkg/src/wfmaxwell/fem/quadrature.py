"""Conical-product quadrature on the reference tetrahedron.

The reference tet has vertices (0,0,0), (1,0,0), (0,1,0), (0,0,1). The rule
collapses a tensor product of Gauss-Jacobi rules through the Duffy map
x = t1, y = t2 (1-t1), z = t3 (1-t1)(1-t2), whose Jacobian (1-t1)^2 (1-t2)
is absorbed into the Jacobi weights. An n-point rule per direction is exact
for total degree 2n - 1.
"""

from dataclasses import dataclass
from math import factorial

import numpy as np
from scipy.special import roots_jacobi

from ..errors import UnsupportedDegreeError

MAX_DEGREE = 10


@dataclass(frozen=True)
class QuadratureRule:
    """Points in barycentric coordinates; weights sum to the volume 1/6."""

    degree: int
    points: np.ndarray
    weights: np.ndarray

    @property
    def num_points(self):
        return len(self.weights)

    @property
    def points_xyz(self):
        return self.points[:, 1:]


def _jacobi_01(n, alpha):
    """Gauss-Jacobi rule on [0,1] with weight (1-t)^alpha."""
    x, w = roots_jacobi(n, alpha, 0.0)
    return (x + 1.0) / 2.0, w * 0.5 ** (alpha + 1)


def quadrature(degree):
    """Rule integrating all monomials of total degree <= degree exactly."""
    degree = int(degree)
    if not 0 <= degree <= MAX_DEGREE:
        raise UnsupportedDegreeError(f"quadrature degree {degree} not in 0..{MAX_DEGREE}")
    n = degree // 2 + 1
    t1, w1 = _jacobi_01(n, 2.0)
    t2, w2 = _jacobi_01(n, 1.0)
    t3, w3 = _jacobi_01(n, 0.0)

    T1, T2, T3 = np.meshgrid(t1, t2, t3, indexing="ij")
    x = T1.ravel()
    y = (T2 * (1.0 - T1)).ravel()
    z = (T3 * (1.0 - T1) * (1.0 - T2)).ravel()
    weights = (w1[:, None, None] * w2[None, :, None] * w3[None, None, :]).ravel()

    points = np.column_stack([1.0 - x - y - z, x, y, z])
    points.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(degree=degree, points=points, weights=weights)


def exact_monomial_integral(a, b, c):
    """Closed form of the reference-tet integral of x^a y^b z^c."""
    return factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 3)
