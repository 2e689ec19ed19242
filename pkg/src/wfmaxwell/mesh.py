"""Tetrahedral simplicial complexes on axis-aligned boxes.

A :class:`Mesh` stores vertices and positively oriented tetrahedra and
derives faces, edges, adjacency and boundary flags at construction time,
so a constructed mesh always satisfies its invariants (conforming face
adjacency, Euler characteristic 1 on a box, volume conservation).

The structured generator :func:`build_box_mesh` splits every subcube of an
n x n x n grid into the same six tetrahedra around the main diagonal, which
tiles space conformingly.
"""

from dataclasses import dataclass
from itertools import combinations, permutations

import numpy as np

from .errors import DegenerateElementError, GeometryInconsistencyError, NonManifoldMeshError

# Vertex classes on the boundary of a box domain.
INTERIOR = 0
FACE_INTERIOR = 1
BOUNDARY_EDGE = 2
CORNER = 3

CLASS_NAMES = {
    INTERIOR: "interior",
    FACE_INTERIOR: "face_interior",
    BOUNDARY_EDGE: "boundary_edge",
    CORNER: "corner",
}


@dataclass(frozen=True)
class Box:
    """Axis-aligned box, the only supported domain geometry."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != 3 or len(hi) != 3:
            raise ValueError("box bounds must be 3-dimensional")
        if not all(np.isfinite(lo)) or not all(np.isfinite(hi)):
            raise ValueError("box bounds must be finite")
        if any(h <= l for l, h in zip(lo, hi)):
            raise ValueError("box must have positive extent in every axis")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def extent(self):
        return tuple(h - l for l, h in zip(self.lo, self.hi))

    @property
    def volume(self):
        e = self.extent
        return e[0] * e[1] * e[2]

    def feature_tolerance(self):
        """Absolute snap tolerance for boundary feature detection."""
        return 1e-12 * max(self.extent)


def unit_cube():
    return Box((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))


def pi_cube():
    return Box((0.0, 0.0, 0.0), (np.pi, np.pi, np.pi))


def signed_volumes(vertices, tets):
    """Signed volume of each tetrahedron (positive for right-handed order)."""
    p = vertices[tets]
    a = p[:, 1] - p[:, 0]
    b = p[:, 2] - p[:, 0]
    c = p[:, 3] - p[:, 0]
    return np.einsum("ij,ij->i", a, np.cross(b, c)) / 6.0


class Mesh:
    """Immutable conforming tetrahedral mesh with derived connectivity.

    Parameters
    ----------
    vertices : (nv, 3) float array
    tets : (nt, 4) int array
        Vertex indices; orientation is normalized so every signed volume
        is strictly positive.
    box : Box, optional
        Domain descriptor. Needed for boundary classification and the
        domain-volume invariant.
    """

    def __init__(self, vertices, tets, box=None):
        vertices = np.ascontiguousarray(vertices, dtype=np.float64)
        tets = np.ascontiguousarray(tets, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 3:
            raise ValueError("vertices must be an (nv, 3) array")
        if tets.ndim != 2 or tets.shape[1] != 4:
            raise ValueError("tets must be an (nt, 4) array")
        if not np.isfinite(vertices).all():
            raise ValueError("vertex coordinates must be finite")
        if tets.size and (tets.min() < 0 or tets.max() >= len(vertices)):
            raise ValueError("tet refers to a vertex that does not exist")
        for t in tets:
            if len(set(t.tolist())) != 4:
                raise ValueError(f"tet {t.tolist()} has repeated vertices")

        # Normalize orientation: swap the last two vertices where needed.
        vols = signed_volumes(vertices, tets)
        flip = vols < 0.0
        tets = tets.copy()
        tets[flip] = tets[flip][:, [0, 1, 3, 2]]
        vols = np.abs(vols)
        if np.any(vols <= 0.0):
            bad = int(np.argmin(vols))
            raise DegenerateElementError(f"tet {bad} has zero volume")

        self.vertices = vertices
        self.tets = tets
        self.box = box
        self.tet_volumes = vols
        self._derive_connectivity()
        self.vertices.setflags(write=False)
        self.tets.setflags(write=False)

    # -- connectivity -----------------------------------------------------

    def _derive_connectivity(self):
        nv = len(self.vertices)
        nt = len(self.tets)

        # Local face i is opposite local vertex i.
        face_slots = np.stack(
            [np.sort(self.tets[:, [j for j in range(4) if j != i]], axis=1) for i in range(4)],
            axis=1,
        ).reshape(-1, 3)
        faces, inverse, counts = np.unique(
            face_slots, axis=0, return_inverse=True, return_counts=True
        )
        if counts.max(initial=0) > 2:
            raise NonManifoldMeshError(
                f"{int((counts > 2).sum())} faces have more than two incident tets"
            )

        face_tets = -np.ones((len(faces), 2), dtype=np.int64)
        tet_ids = np.repeat(np.arange(nt), 4)
        # Fill adjacency in ascending tet order so the layout is deterministic.
        for slot, tid in zip(inverse, tet_ids):
            if face_tets[slot, 0] < 0:
                face_tets[slot, 0] = tid
            else:
                face_tets[slot, 1] = tid

        edge_slots = self.tets[:, list(combinations(range(4), 2))].reshape(-1, 2)
        edges = np.unique(np.sort(edge_slots, axis=1), axis=0)

        boundary_faces = counts == 1
        boundary_edge_keys = set()
        boundary_vertex = np.zeros(nv, dtype=bool)
        for f in faces[boundary_faces]:
            a, b, c = (int(v) for v in f)
            boundary_vertex[[a, b, c]] = True
            boundary_edge_keys.update([(a, b), (a, c), (b, c)])
        boundary_edges = np.array(
            [tuple(e) in boundary_edge_keys for e in edges.tolist()], dtype=bool
        )

        self.faces = faces
        self.edges = edges
        self.face_tets = face_tets
        self.tet_faces = inverse.reshape(nt, 4)
        self.boundary_face_mask = boundary_faces
        self.boundary_edge_mask = boundary_edges
        self.boundary_vertex_mask = boundary_vertex
        for arr in (faces, edges, face_tets, self.tet_faces):
            arr.setflags(write=False)

    # -- basic queries ----------------------------------------------------

    @property
    def num_vertices(self):
        return len(self.vertices)

    @property
    def num_tets(self):
        return len(self.tets)

    @property
    def num_faces(self):
        return len(self.faces)

    @property
    def num_edges(self):
        return len(self.edges)

    def euler_characteristic(self):
        return self.num_vertices - self.num_edges + self.num_faces - self.num_tets

    def face_index(self, key):
        """Index of the face with the given sorted vertex triple, or -1."""
        key = np.sort(np.asarray(key))
        i = np.searchsorted(self.faces[:, 0], key[0])
        while i < len(self.faces) and self.faces[i, 0] == key[0]:
            if self.faces[i, 1] == key[1] and self.faces[i, 2] == key[2]:
                return i
            i += 1
        return -1

    def face_normal(self, face_id):
        """Unit outward normal of a boundary face."""
        f = self.faces[face_id]
        t = self.face_tets[face_id, 0]
        p = self.vertices[f]
        n = np.cross(p[1] - p[0], p[2] - p[0])
        n /= np.linalg.norm(n)
        opposite = [v for v in self.tets[t] if v not in set(f.tolist())][0]
        if np.dot(n, self.vertices[opposite] - p[0]) > 0:
            n = -n
        return n

    def validate(self):
        """Residuals of the mesh invariants, for reporting and tests."""
        report = {
            "max_face_adjacency": int(
                (self.face_tets >= 0).sum(axis=1).max(initial=0)
            ),
            "euler_characteristic": self.euler_characteristic(),
            "min_tet_volume": float(self.tet_volumes.min(initial=np.inf)),
        }
        if self.box is not None:
            total = float(self.tet_volumes.sum())
            report["volume_residual"] = abs(total - self.box.volume) / self.box.volume
            # Every single-adjacency face must lie on the box boundary,
            # otherwise two neighboring tets failed to share it.
            tol = self.box.feature_tolerance()
            ok = True
            for fid in np.nonzero(self.boundary_face_mask)[0]:
                pts = self.vertices[self.faces[fid]]
                on_plane = False
                for axis in range(3):
                    for bound in (self.box.lo[axis], self.box.hi[axis]):
                        if np.all(np.abs(pts[:, axis] - bound) <= tol):
                            on_plane = True
                if not ok or not on_plane:
                    ok = False
                    break
            report["boundary_faces_on_box"] = bool(ok)
        return report


def build_box_mesh(box, n):
    """Structured mesh of a box: n^3 subcubes, each split into 6 tets.

    The six tets share the subcube's main diagonal and all subcubes use the
    identical split, so the mesh is conforming. Vertex ids run x-fastest
    over the (n+1)^3 grid; output is deterministic.
    """
    if not isinstance(box, Box):
        box = Box(*box)
    n = int(n)
    if n < 1:
        raise ValueError("n must be at least 1")

    m = n + 1
    lo = np.array(box.lo)
    hi = np.array(box.hi)
    idx = np.arange(m)
    coords = [lo[a] + idx * (hi[a] - lo[a]) / n for a in range(3)]

    vertices = np.empty((m * m * m, 3))
    for k in range(m):
        for j in range(m):
            for i in range(m):
                vertices[i + m * (j + m * k)] = (coords[0][i], coords[1][j], coords[2][k])

    def vid(i, j, k):
        return i + m * (j + m * k)

    unit = np.eye(3, dtype=np.int64)
    tets = []
    for k in range(n):
        for j in range(n):
            for i in range(n):
                base = np.array([i, j, k])
                for perm in permutations(range(3)):
                    c0 = base
                    c1 = c0 + unit[perm[0]]
                    c2 = c1 + unit[perm[1]]
                    c3 = base + 1
                    tets.append([vid(*c0), vid(*c1), vid(*c2), vid(*c3)])
    return Mesh(vertices, np.array(tets, dtype=np.int64), box=box)


@dataclass
class BoundaryVertexClasses:
    """Per-vertex boundary class with the incident box-plane normals."""

    kinds: np.ndarray
    normals: list

    def counts(self):
        return {
            name: int((self.kinds == kind).sum()) for kind, name in CLASS_NAMES.items()
        }


def box_plane_normals(box, points, tol=None):
    """Outward normals of the box planes each point lies on (list of (m,3))."""
    if tol is None:
        tol = box.feature_tolerance()
    points = np.asarray(points)
    hits = []
    planes = []
    for axis in range(3):
        n = np.zeros(3)
        n[axis] = -1.0
        planes.append((axis, box.lo[axis], n))
        n = np.zeros(3)
        n[axis] = 1.0
        planes.append((axis, box.hi[axis], n))
    on = np.stack(
        [np.abs(points[:, axis] - bound) <= tol for axis, bound, _ in planes], axis=1
    )
    for row in on:
        hits.append(np.array([planes[i][2] for i in np.nonzero(row)[0]]).reshape(-1, 3))
    return hits


def classify_boundary_vertices(mesh):
    """Classify every vertex as corner / boundary-edge / face-interior / interior.

    Classification is geometric (against the box planes) and cross-checked
    against the connectivity-derived boundary flags.
    """
    if mesh.box is None:
        raise ValueError("mesh has no box domain descriptor")
    normals = box_plane_normals(mesh.box, mesh.vertices)
    kinds = np.empty(mesh.num_vertices, dtype=np.int8)
    for v, nrm in enumerate(normals):
        nplanes = len(nrm)
        if nplanes == 0:
            kinds[v] = INTERIOR
        elif nplanes == 1:
            kinds[v] = FACE_INTERIOR
        elif nplanes == 2:
            kinds[v] = BOUNDARY_EDGE
        elif nplanes == 3:
            kinds[v] = CORNER
        else:
            raise GeometryInconsistencyError(
                f"vertex {v} lies on {nplanes} box planes"
            )
        if (kinds[v] != INTERIOR) != bool(mesh.boundary_vertex_mask[v]):
            raise GeometryInconsistencyError(
                f"vertex {v}: geometric and topological boundary flags disagree"
            )
    return BoundaryVertexClasses(kinds=kinds, normals=normals)


@dataclass
class QualityReport:
    h: np.ndarray
    rho: np.ndarray
    ratio: np.ndarray

    @property
    def max_ratio(self):
        return float(self.ratio.max())


def mesh_quality(mesh):
    """Per-tet diameter h_T, inscribed-sphere diameter rho_T and their ratio.

    rho_T = 6 |T| / (sum of face areas), i.e. twice the inradius.
    """
    p = mesh.vertices[mesh.tets]
    if np.any(mesh.tet_volumes <= 0.0):
        raise DegenerateElementError("mesh contains a non-positive volume tet")

    diffs = p[:, [0, 0, 0, 1, 1, 2]] - p[:, [1, 2, 3, 2, 3, 3]]
    h = np.sqrt((diffs**2).sum(axis=2)).max(axis=1)

    areas = np.zeros(len(p))
    for i in range(4):
        tri = p[:, [j for j in range(4) if j != i]]
        cr = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        areas += 0.5 * np.sqrt((cr**2).sum(axis=1))
    rho = 6.0 * mesh.tet_volumes / areas
    return QualityReport(h=h, rho=rho, ratio=h / rho)


# -- ASCII mesh format -------------------------------------------------------

FORMAT_HEADER = "wfmesh 1"


def write_mesh(mesh, path):
    """Write the documented ASCII format (bit-exact round trip)."""
    with open(path, "w") as fh:
        fh.write(FORMAT_HEADER + "\n")
        fh.write(f"{mesh.num_vertices} {mesh.num_tets}\n")
        for x, y, z in mesh.vertices:
            fh.write(f"{x:.16e} {y:.16e} {z:.16e}\n")
        for t in mesh.tets:
            fh.write(f"{t[0]} {t[1]} {t[2]} {t[3]}\n")


def read_mesh(path, box=None):
    """Read the ASCII format. The box, when not given, is the vertex bounding box."""
    with open(path) as fh:
        header = fh.readline().strip()
        if header != FORMAT_HEADER:
            raise ValueError(f"not a wfmesh file: header {header!r}")
        nv, nt = (int(tok) for tok in fh.readline().split())
        vertices = np.array(
            [[float(tok) for tok in fh.readline().split()] for _ in range(nv)]
        )
        tets = np.array(
            [[int(tok) for tok in fh.readline().split()] for _ in range(nt)],
            dtype=np.int64,
        )
    if box is None:
        box = Box(tuple(vertices.min(axis=0)), tuple(vertices.max(axis=0)))
    return Mesh(vertices, tets, box=box)
