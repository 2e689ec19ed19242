"""Tangential boundary condition u x n = 0 via per-node constraint frames.

Every scalar node gets an orthonormal frame split into free and constrained
directions. A node strictly inside a planar boundary patch keeps one free
direction (the normal); a node where two non-parallel boundary planes meet
keeps none, since a continuous field parallel to both normals must vanish;
interior nodes keep all three. The frames are derived from the incident
boundary-face normals of the mesh, not from hardcoded box axes, and are
cross-checked against the node positions on the box.

Stacking the free directions columnwise gives the reduction operator R with
orthonormal columns; the constrained problem uses R^T K R and R^T M R.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import GeometryInconsistencyError
from .fem.assemble import SymmetricSparseMatrix
from .fem.dofmap import NODE_CELL, NODE_EDGE, NODE_FACE, NODE_VERTEX
from .mesh import box_plane_normals

PARALLEL_TOL = 1e-8


@dataclass
class NodeConstraint:
    node: int
    free: np.ndarray        # (f, 3) orthonormal free directions
    constrained: np.ndarray  # (3 - f, 3) orthonormal constrained directions

    @property
    def num_free(self):
        return len(self.free)


@dataclass
class ConstraintSet:
    constraints: list
    reduction: sp.csr_matrix  # (3 * num_scalar, reduced_dim), orthonormal columns

    @property
    def reduced_dim(self):
        return self.reduction.shape[1]

    @property
    def full_dim(self):
        return self.reduction.shape[0]


def _tangent_pair(normal):
    """Deterministic orthonormal completion of a unit vector."""
    axis = np.zeros(3)
    axis[np.argmin(np.abs(normal))] = 1.0
    t1 = np.cross(normal, axis)
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(normal, t1)
    return np.vstack([t1, t2])


def _principal_normal(normals):
    """Unit normal spanning a rank-1 set of normals, sign-normalized."""
    direction = normals[0] / np.linalg.norm(normals[0])
    lead = np.argmax(np.abs(direction))
    if direction[lead] < 0:
        direction = -direction
    return direction


def _normal_rank(normals):
    stacked = np.asarray(normals)
    s = np.linalg.svd(stacked, compute_uv=False)
    return int((s > PARALLEL_TOL * s[0]).sum())


def build_tangential_constraints(mesh, dofmap):
    """ConstraintSet enforcing u x n = 0 on the boundary of the box mesh."""
    if mesh.box is None:
        raise ValueError("mesh has no box domain descriptor")

    # boundary faces incident to each vertex / edge
    vertex_faces = {v: [] for v in range(mesh.num_vertices)}
    edge_faces = {}
    edge_ids = {tuple(e): i for i, e in enumerate(mesh.edges.tolist())}
    boundary_ids = np.nonzero(mesh.boundary_face_mask)[0]
    normals_of = {int(f): mesh.face_normal(int(f)) for f in boundary_ids}
    for f in boundary_ids:
        a, b, c = (int(v) for v in mesh.faces[f])
        for v in (a, b, c):
            vertex_faces[v].append(int(f))
        for key in ((a, b), (a, c), (b, c)):
            edge_faces.setdefault(edge_ids[key], []).append(int(f))

    def incident_normals(node):
        kind, ent = dofmap.node_kind[node], int(dofmap.node_entity[node])
        if kind == NODE_VERTEX:
            return [normals_of[f] for f in vertex_faces[ent]]
        if kind == NODE_EDGE:
            return [normals_of[f] for f in edge_faces.get(ent, [])]
        if kind == NODE_FACE:
            return [normals_of[ent]] if mesh.boundary_face_mask[ent] else []
        if kind == NODE_CELL:
            return []
        raise ValueError(f"unknown node kind {kind}")

    # independent geometric classification against the box planes
    plane_hits = box_plane_normals(mesh.box, dofmap.positions)

    eye = np.eye(3)
    constraints = []
    col_rows, col_cols, col_vals = [], [], []
    reduced = 0
    for node in range(dofmap.num_scalar):
        normals = incident_normals(node)
        n_planes = len(plane_hits[node])
        if not normals:
            if n_planes != 0:
                raise GeometryInconsistencyError(
                    f"node {node} lies on a box plane but touches no boundary face"
                )
            free = eye
            constrained = np.empty((0, 3))
        else:
            if n_planes == 0:
                raise GeometryInconsistencyError(
                    f"node {node} touches a boundary face but matches no box feature"
                )
            rank = _normal_rank(normals)
            if rank != max(1, min(n_planes, 3)):
                raise GeometryInconsistencyError(
                    f"node {node}: incident-normal rank {rank} disagrees with "
                    f"{n_planes} box planes"
                )
            if rank == 1:
                normal = _principal_normal(normals)
                free = normal[None, :]
                constrained = _tangent_pair(normal)
            else:
                free = np.empty((0, 3))
                constrained = eye
        constraints.append(NodeConstraint(node=node, free=free, constrained=constrained))
        for direction in free:
            for comp in range(3):
                col_rows.append(3 * node + comp)
                col_cols.append(reduced)
                col_vals.append(direction[comp])
            reduced += 1

    reduction = sp.csr_matrix(
        (col_vals, (col_rows, col_cols)), shape=(dofmap.num_vector, reduced)
    )
    return ConstraintSet(constraints=constraints, reduction=reduction)


def identity_constraints(dofmap):
    """All-free constraint set (no boundary condition)."""
    eye3 = np.eye(3)
    constraints = [
        NodeConstraint(node=i, free=eye3, constrained=np.empty((0, 3)))
        for i in range(dofmap.num_scalar)
    ]
    return ConstraintSet(
        constraints=constraints, reduction=sp.identity(dofmap.num_vector, format="csr")
    )


def apply_constraints(K, M, constraints):
    """Galerkin restriction (R^T K R, R^T M R) as symmetric matrices."""
    R = constraints.reduction
    if K.dim != R.shape[0] or M.dim != R.shape[0]:
        raise ValueError("constraint and matrix dimensions disagree")

    def reduce(A):
        prod = (R.T @ (A.to_csr() @ R)).tocsr()
        return SymmetricSparseMatrix(R.shape[1], sp.triu(prod, k=0))

    return reduce(K), reduce(M)
