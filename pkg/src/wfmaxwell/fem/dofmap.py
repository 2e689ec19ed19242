"""Global scalar DOF numbering for continuous Lagrange spaces.

Scalar nodes are numbered entity by entity: all mesh vertices first, then
k-1 nodes per edge (walking from the lower-id endpoint), then the interior
face lattice (faces in their global sorted order), then cell-interior
nodes per tet. Shared entities therefore receive identical indices from
every incident tet. The vector space interleaves components:
vector dof = 3 * scalar dof + component.
"""

from dataclasses import dataclass
from math import comb

import numpy as np

from .basis import lattice_multi_indices

NODE_VERTEX = 0
NODE_EDGE = 1
NODE_FACE = 2
NODE_CELL = 3


def _interior_triples(k):
    """Face-interior lattice triples (b0, b1, b2), each >= 1, summing to k."""
    out = []
    for b0 in range(1, k - 1):
        for b1 in range(1, k - b0):
            out.append((b0, b1, k - b0 - b1))
    return out


@dataclass
class DofMap:
    """Scalar node numbering plus per-element scatter table."""

    degree: int
    num_scalar: int
    positions: np.ndarray
    elem_dofs: np.ndarray
    node_kind: np.ndarray
    node_entity: np.ndarray

    @property
    def num_vector(self):
        return 3 * self.num_scalar


def build_dof_map(mesh, k):
    k = int(k)
    if k < 1:
        raise ValueError("degree must be >= 1")
    nv, ne, nf, nt = mesh.num_vertices, mesh.num_edges, mesh.num_faces, mesh.num_tets
    per_edge = k - 1
    per_face = comb(k - 1, 2)
    per_cell = comb(k - 1, 3)
    num_scalar = nv + per_edge * ne + per_face * nf + per_cell * nt

    base_edge = nv
    base_face = nv + per_edge * ne
    base_cell = base_face + per_face * nf

    positions = np.empty((num_scalar, 3))
    node_kind = np.empty(num_scalar, dtype=np.int8)
    node_entity = np.empty(num_scalar, dtype=np.int64)

    positions[:nv] = mesh.vertices
    node_kind[:nv] = NODE_VERTEX
    node_entity[:nv] = np.arange(nv)

    if per_edge:
        for e, (u, v) in enumerate(mesh.edges):
            for m in range(1, k):
                idx = base_edge + e * per_edge + (m - 1)
                positions[idx] = ((k - m) * mesh.vertices[u] + m * mesh.vertices[v]) / k
                node_kind[idx] = NODE_EDGE
                node_entity[idx] = e

    triples = _interior_triples(k)
    triple_slot = {t: s for s, t in enumerate(triples)}
    if per_face:
        for f, (u, v, w) in enumerate(mesh.faces):
            for s, (b0, b1, b2) in enumerate(triples):
                idx = base_face + f * per_face + s
                positions[idx] = (
                    b0 * mesh.vertices[u] + b1 * mesh.vertices[v] + b2 * mesh.vertices[w]
                ) / k
                node_kind[idx] = NODE_FACE
                node_entity[idx] = f

    cell_alphas = [a for a in lattice_multi_indices(k) if (a > 0).all()]
    if per_cell:
        for t, tet in enumerate(mesh.tets):
            for s, alpha in enumerate(cell_alphas):
                idx = base_cell + t * per_cell + s
                positions[idx] = (alpha @ mesh.vertices[tet]) / k
                node_kind[idx] = NODE_CELL
                node_entity[idx] = t

    edge_ids = {tuple(e): i for i, e in enumerate(mesh.edges.tolist())}
    face_ids = {tuple(f): i for i, f in enumerate(mesh.faces.tolist())}

    alphas = lattice_multi_indices(k)
    cell_slot = {tuple(a): s for s, a in enumerate(map(tuple, cell_alphas))}
    elem_dofs = np.empty((nt, len(alphas)), dtype=np.int64)
    for t, tet in enumerate(mesh.tets):
        tet = tet.tolist()
        for loc, alpha in enumerate(alphas):
            support = [i for i in range(4) if alpha[i] > 0]
            if len(support) == 1:
                gid = tet[support[0]]
            elif len(support) == 2:
                i, j = support
                gi, gj = tet[i], tet[j]
                if gi < gj:
                    e, m = edge_ids[(gi, gj)], int(alpha[j])
                else:
                    e, m = edge_ids[(gj, gi)], int(alpha[i])
                gid = base_edge + e * per_edge + (m - 1)
            elif len(support) == 3:
                pairs = sorted((tet[i], int(alpha[i])) for i in support)
                key = tuple(g for g, _ in pairs)
                b = tuple(a for _, a in pairs)
                gid = base_face + face_ids[key] * per_face + triple_slot[b]
            else:
                gid = base_cell + t * per_cell + cell_slot[tuple(int(a) for a in alpha)]
            elem_dofs[t, loc] = gid

    positions.setflags(write=False)
    elem_dofs.setflags(write=False)
    return DofMap(
        degree=k,
        num_scalar=num_scalar,
        positions=positions,
        elem_dofs=elem_dofs,
        node_kind=node_kind,
        node_entity=node_entity,
    )
