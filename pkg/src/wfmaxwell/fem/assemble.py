"""Assembly of the curl-curl stiffness and mass forms on vector Lagrange spaces.

The vector space is three interleaved scalar copies; element kernels couple
components only through the curl. Matrices are stored as their upper
triangle, so symmetry is exact by construction. Element contributions are
scattered in ascending tet order, which keeps assembly deterministic.
"""

import numpy as np
import scipy.sparse as sp

from .. import _kernels
from ..errors import DegenerateElementError

ASSEMBLY_CHUNK = 512


class SymmetricSparseMatrix:
    """Symmetric sparse matrix storing only the upper triangle."""

    def __init__(self, dim, upper):
        upper = sp.csr_matrix(upper)
        upper.sum_duplicates()
        upper.eliminate_zeros()
        self.dim = int(dim)
        self.upper = upper

    @classmethod
    def from_triplets(cls, dim, rows, cols, values):
        """Build from triplets; entries below the diagonal are rejected."""
        if len(rows) and (np.asarray(rows) > np.asarray(cols)).any():
            raise ValueError("triplets must lie in the upper triangle")
        coo = sp.coo_matrix((values, (rows, cols)), shape=(dim, dim))
        return cls(dim, coo.tocsr())

    def to_csr(self):
        """Full symmetric CSR. Exact: mirrored entries are copies."""
        upper = self.upper
        strict = sp.triu(upper, k=1)
        return (upper + strict.T).tocsr()

    def toarray(self):
        return self.to_csr().toarray()

    def matvec(self, x):
        return self.to_csr() @ x

    def __matmul__(self, x):
        return self.matvec(x)

    @property
    def nnz(self):
        return self.upper.nnz

    def norm_max(self):
        """Largest absolute entry."""
        return float(np.abs(self.upper.data).max(initial=0.0))

    def dump_lines(self):
        """Coordinate-list lines `i j value`, upper triangle, sorted by (i, j)."""
        coo = self.upper.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return [
            f"{coo.row[p]} {coo.col[p]} {coo.data[p]:.16e}" for p in order
        ]

    def dump(self, path):
        with open(path, "w") as fh:
            for line in self.dump_lines():
                fh.write(line + "\n")


def _geometry(mesh):
    """Per-tet Jacobians of the reference-to-physical affine maps."""
    p = mesh.vertices[mesh.tets]
    jac = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0], p[:, 3] - p[:, 0]], axis=2)
    detj = np.linalg.det(jac)
    if np.any(detj <= 0.0):
        raise DegenerateElementError("non-positive element Jacobian")
    jinv = np.linalg.inv(jac)
    return np.ascontiguousarray(jinv), np.ascontiguousarray(detj)


def _vector_dofs(elem_dofs):
    """(nt, 3*nl) interleaved vector dof table."""
    nt, nl = elem_dofs.shape
    vd = (3 * elem_dofs[:, :, None] + np.arange(3)[None, None, :]).reshape(nt, 3 * nl)
    return vd


def _scatter_upper(dim, vdofs, local_blocks, rows_acc, cols_acc, vals_acc):
    rows = np.broadcast_to(vdofs[:, :, None], local_blocks.shape)
    cols = np.broadcast_to(vdofs[:, None, :], local_blocks.shape)
    keep = rows <= cols
    rows_acc.append(rows[keep])
    cols_acc.append(cols[keep])
    vals_acc.append(local_blocks[keep])


def assemble_curl_curl(mesh, dofmap, basis, quad):
    """Stiffness matrix of (curl u, curl v); symmetric positive semidefinite."""
    if quad.degree < 2 * (basis.degree - 1):
        raise ValueError(
            f"quadrature degree {quad.degree} below 2(k-1) = {2 * (basis.degree - 1)}"
        )
    _, gref = basis.tabulate(quad.points)
    gref = np.ascontiguousarray(gref)
    jinv, detj = _geometry(mesh)
    vdofs = _vector_dofs(dofmap.elem_dofs)

    dim = dofmap.num_vector
    rows, cols, vals = [], [], []
    for start in range(0, mesh.num_tets, ASSEMBLY_CHUNK):
        stop = min(start + ASSEMBLY_CHUNK, mesh.num_tets)
        kloc = _kernels.curl_curl_local(
            gref, np.ascontiguousarray(quad.weights), jinv[start:stop], detj[start:stop]
        )
        _scatter_upper(dim, vdofs[start:stop], kloc, rows, cols, vals)
    return SymmetricSparseMatrix.from_triplets(
        dim, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    )


def assemble_mass(mesh, dofmap, basis, quad):
    """Mass matrix of (u, v); symmetric positive definite."""
    if quad.degree < 2 * basis.degree:
        raise ValueError(
            f"quadrature degree {quad.degree} below 2k = {2 * basis.degree}"
        )
    phi, _ = basis.tabulate(quad.points)
    mref = phi.T @ (quad.weights[:, None] * phi)
    jinv, detj = _geometry(mesh)

    nt, nl = dofmap.elem_dofs.shape
    dim = dofmap.num_vector
    rows, cols, vals = [], [], []
    for start in range(0, nt, ASSEMBLY_CHUNK):
        stop = min(start + ASSEMBLY_CHUNK, nt)
        block = detj[start:stop, None, None] * mref[None, :, :]
        for c in range(3):
            gdofs = 3 * dofmap.elem_dofs[start:stop] + c
            r = np.broadcast_to(gdofs[:, :, None], block.shape)
            col = np.broadcast_to(gdofs[:, None, :], block.shape)
            keep = r <= col
            rows.append(r[keep])
            cols.append(col[keep])
            vals.append(block[keep])
    return SymmetricSparseMatrix.from_triplets(
        dim, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    )


def interpolate_field(dofmap, field):
    """Nodal vector interpolant of a callable field(points) -> (n, 3)."""
    values = np.asarray(field(dofmap.positions), dtype=float)
    if values.shape != (dofmap.num_scalar, 3):
        raise ValueError("field must return one 3-vector per scalar node")
    return values.reshape(-1)
