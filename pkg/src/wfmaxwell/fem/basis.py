"""Nodal Lagrange bases on the reference tetrahedron, degrees 1 to 4.

Basis functions are expressed in the Bernstein basis (well conditioned for
these degrees); the nodal coefficient matrix is the inverse of the
Bernstein collocation matrix at the barycentric lattice points.
"""

from dataclasses import dataclass
from math import comb, factorial

import numpy as np

from ..errors import UnsupportedDegreeError

MAX_K = 4

# Reference gradients of the barycentric coordinates.
GRAD_LAMBDA = np.array(
    [[-1.0, -1.0, -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
)


def lattice_multi_indices(k):
    """All (a0, a1, a2, a3) with sum k, ordered lexicographically in (a1, a2, a3)."""
    out = []
    for a1 in range(k + 1):
        for a2 in range(k + 1 - a1):
            for a3 in range(k + 1 - a1 - a2):
                out.append((k - a1 - a2 - a3, a1, a2, a3))
    return np.array(out, dtype=np.int64)


def _bernstein(alphas, k, points):
    """Bernstein values and barycentric partial derivatives at points.

    Returns (values (np, nb), dlam (np, nb, 4)).
    """
    lam = np.asarray(points)
    npts, nb = len(lam), len(alphas)
    coef = np.array(
        [factorial(k) / np.prod([factorial(int(a)) for a in alpha]) for alpha in alphas]
    )
    values = np.empty((npts, nb))
    dlam = np.zeros((npts, nb, 4))
    for j, alpha in enumerate(alphas):
        powers = np.ones(npts)
        for i in range(4):
            powers = powers * lam[:, i] ** alpha[i]
        values[:, j] = coef[j] * powers
        for i in range(4):
            if alpha[i] == 0:
                continue
            partial = np.full(npts, float(alpha[i]))
            for l in range(4):
                e = alpha[l] - (1 if l == i else 0)
                partial = partial * lam[:, l] ** e
            dlam[:, j, i] = coef[j] * partial
    return values, dlam


@dataclass(frozen=True)
class ReferenceBasis:
    """Lagrange basis of degree k with its barycentric lattice nodes."""

    degree: int
    node_indices: np.ndarray
    nodes: np.ndarray
    _coeff: np.ndarray

    @property
    def dim(self):
        return len(self.nodes)

    def tabulate(self, points):
        """Values (np, dim) and reference-xyz gradients (np, dim, 3) at points.

        Points are barycentric (np, 4).
        """
        bvals, bdlam = _bernstein(self.node_indices, self.degree, points)
        values = bvals @ self._coeff
        grads_lam = np.einsum("pjl,ji->pil", bdlam, self._coeff)
        grads = np.einsum("pil,ld->pid", grads_lam, GRAD_LAMBDA)
        return values, grads


def reference_basis(k):
    k = int(k)
    if not 1 <= k <= MAX_K:
        raise UnsupportedDegreeError(f"degree {k} not in 1..{MAX_K}")
    alphas = lattice_multi_indices(k)
    nodes = alphas / float(k)
    collocation, _ = _bernstein(alphas, k, nodes)
    coeff = np.linalg.solve(collocation, np.eye(len(alphas)))
    nodes.setflags(write=False)
    alphas.setflags(write=False)
    return ReferenceBasis(degree=k, node_indices=alphas, nodes=nodes, _coeff=coeff)


def basis_dimension(k):
    return comb(k + 3, 3)
