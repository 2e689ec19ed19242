"""Worsey-Farin refinement of a conforming tetrahedral mesh.

Each tetrahedron is split into 12 children: the incenter is connected to
the four vertices, and on every face a split point is connected to the
face's vertices and to the incenter. On interior faces the split point is
the intersection of the face with the segment joining the two neighboring
incenters, which makes the induced three-triangle split of the face agree
from both sides; on boundary faces it is the barycenter.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateElementError, InvalidSplitError
from .mesh import Mesh, mesh_quality

INTERIORITY_TOL = 1e-12


def _face_areas(verts):
    """Areas of the four faces of one tet, face i opposite vertex i."""
    areas = np.empty(4)
    for i in range(4):
        tri = verts[[j for j in range(4) if j != i]]
        areas[i] = 0.5 * np.linalg.norm(np.cross(tri[1] - tri[0], tri[2] - tri[0]))
    return areas


def incenter(verts):
    """Incenter of a tetrahedron: the area-weighted vertex average.

    Equidistant from the four face planes; the common distance is half of
    rho_T = 6|T| / (total face area).
    """
    verts = np.asarray(verts, dtype=float)
    vol = np.dot(verts[1] - verts[0], np.cross(verts[2] - verts[0], verts[3] - verts[0])) / 6.0
    h = max(
        np.linalg.norm(verts[i] - verts[j]) for i in range(4) for j in range(i + 1, 4)
    )
    if abs(vol) < 1e-14 * h**3:
        raise DegenerateElementError("tet volume below 1e-14 * h^3")
    areas = _face_areas(verts)
    return areas @ verts / areas.sum()


def _barycentric_in_triangle(tri, point):
    """Barycentric coordinates of a point assumed to lie in the face plane."""
    e1 = tri[1] - tri[0]
    e2 = tri[2] - tri[0]
    r = point - tri[0]
    g = np.array([[e1 @ e1, e1 @ e2], [e1 @ e2, e2 @ e2]])
    ab = np.linalg.solve(g, np.array([e1 @ r, e2 @ r]))
    return np.array([1.0 - ab.sum(), ab[0], ab[1]])


def face_split_point(face_verts, z1=None, z2=None):
    """Split point of a face for the refinement.

    For a boundary face (no incenters given) this is the barycenter. For an
    interior face it is the intersection of the face plane with the segment
    between the incenters ``z1`` and ``z2``; the point must fall strictly
    inside the face (all barycentric coordinates > 1e-12) or the input mesh
    violates the split's existence guarantee.
    """
    tri = np.asarray(face_verts, dtype=float)
    if z1 is None and z2 is None:
        return tri.mean(axis=0)
    if z1 is None or z2 is None:
        raise ValueError("interior faces need both incenters")

    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    normal = np.cross(tri[1] - tri[0], tri[2] - tri[0])
    denom = normal @ (z2 - z1)
    scale = np.linalg.norm(normal) * np.linalg.norm(z2 - z1)
    if abs(denom) <= 1e-14 * scale:
        raise InvalidSplitError("incenter segment is parallel to the face plane")
    s = (normal @ (tri[0] - z1)) / denom
    if not (0.0 < s < 1.0):
        raise InvalidSplitError("incenter segment does not cross the face")
    point = z1 + s * (z2 - z1)
    bary = _barycentric_in_triangle(tri, point)
    if bary.min() <= INTERIORITY_TOL:
        raise InvalidSplitError(
            f"face split point leaves the open face interior (min barycentric {bary.min():.3e})"
        )
    return point


@dataclass
class WorseyFarinMesh:
    """Refined mesh plus provenance back to the macro mesh.

    children[t] lists the 12 fine tet ids of macro tet t, ordered by
    (local face index, split sector); face_children[f] lists the 3 fine
    face ids covering macro face f.
    """

    macro: Mesh
    fine: Mesh
    incenters: np.ndarray
    face_points: np.ndarray
    children: np.ndarray
    face_children: np.ndarray

    @property
    def incenter_vertex(self):
        """Fine vertex id of macro tet t's incenter is incenter_vertex + t."""
        return self.macro.num_vertices

    @property
    def face_point_vertex(self):
        return self.macro.num_vertices + self.macro.num_tets


def worsey_farin_refine(mesh):
    """Worsey-Farin refinement with provenance. Deterministic for a fixed mesh."""
    nv, nt, nf = mesh.num_vertices, mesh.num_tets, mesh.num_faces

    incenters = np.empty((nt, 3))
    for t in range(nt):
        incenters[t] = incenter(mesh.vertices[mesh.tets[t]])

    face_points = np.empty((nf, 3))
    for f in range(nf):
        tri = mesh.vertices[mesh.faces[f]]
        t1, t2 = mesh.face_tets[f]
        if t2 < 0:
            face_points[f] = face_split_point(tri)
        else:
            face_points[f] = face_split_point(tri, incenters[t1], incenters[t2])
            bary = _barycentric_in_triangle(tri, face_points[f])
            if bary.min() <= INTERIORITY_TOL:
                raise InvalidSplitError(f"face {f}: split point not interior")

    fine_vertices = np.vstack([mesh.vertices, incenters, face_points])
    fine_tets = np.empty((12 * nt, 4), dtype=np.int64)
    child = 0
    for t in range(nt):
        z = nv + t
        tet = mesh.tets[t]
        for i in range(4):
            face_locals = [j for j in range(4) if j != i]
            m = nv + nt + mesh.tet_faces[t, i]
            for j in range(3):
                a, b = [tet[face_locals[l]] for l in range(3) if l != j]
                fine_tets[child] = (z, m, a, b)
                child += 1

    fine = Mesh(fine_vertices, fine_tets, box=mesh.box)
    children = np.arange(12 * nt, dtype=np.int64).reshape(nt, 12)

    face_lookup = {tuple(key): idx for idx, key in enumerate(fine.faces.tolist())}
    face_children = np.empty((nf, 3), dtype=np.int64)
    for f in range(nf):
        m = nv + nt + f
        a, b, c = (int(v) for v in mesh.faces[f])
        for j, pair in enumerate(((b, c), (a, c), (a, b))):
            key = tuple(sorted((m,) + pair))
            face_children[f, j] = face_lookup[key]

    return WorseyFarinMesh(
        macro=mesh,
        fine=fine,
        incenters=incenters,
        face_points=face_points,
        children=children,
        face_children=face_children,
    )


@dataclass
class WfValidationReport:
    conformity_pass: bool
    checks: dict
    volume_residual: float
    min_face_point_barycentric: float
    min_incenter_barycentric: float
    min_shape_ratio: float
    max_shape_ratio: float

    @property
    def passed(self):
        return self.conformity_pass and all(self.checks.values())

    def lines(self):
        out = [f"conformity: {'pass' if self.conformity_pass else 'fail'}"]
        for key, ok in self.checks.items():
            out.append(f"{key}: {'pass' if ok else 'fail'}")
        out.append(f"volume_residual: {self.volume_residual:.3e}")
        out.append(f"min_face_point_barycentric: {self.min_face_point_barycentric:.3e}")
        out.append(f"min_incenter_barycentric: {self.min_incenter_barycentric:.3e}")
        out.append(f"min_shape_ratio: {self.min_shape_ratio:.6f}")
        out.append(f"max_shape_ratio: {self.max_shape_ratio:.6f}")
        return out


def _barycentric_in_tet(verts, point):
    mat = np.column_stack([verts[1] - verts[0], verts[2] - verts[0], verts[3] - verts[0]])
    abc = np.linalg.solve(mat, point - verts[0])
    return np.concatenate([[1.0 - abc.sum()], abc])


def validate_wf(wf):
    """Measure every refinement invariant; report-only, never raises."""
    macro, fine = wf.macro, wf.fine
    checks = {}

    checks["child_count_12"] = wf.children.shape == (macro.num_tets, 12)
    checks["vertex_count"] = (
        fine.num_vertices == macro.num_vertices + macro.num_tets + macro.num_faces
    )
    checks["fine_tet_count"] = fine.num_tets == 12 * macro.num_tets
    checks["euler"] = fine.euler_characteristic() == 1

    child_vols = fine.tet_volumes[wf.children].sum(axis=1)
    vol_residual = float(np.max(np.abs(child_vols - macro.tet_volumes) / macro.tet_volumes))
    checks["volume_conservation"] = vol_residual <= 1e-12

    n_bnd_macro = int(macro.boundary_face_mask.sum())
    n_bnd_fine = int(fine.boundary_face_mask.sum())
    checks["boundary_face_count"] = n_bnd_fine == 3 * n_bnd_macro

    conformity = (fine.face_tets >= 0).sum(axis=1).max(initial=0) <= 2
    if macro.box is not None:
        conformity = conformity and bool(fine.validate().get("boundary_faces_on_box", True))
    conformity = conformity and checks["boundary_face_count"] and checks["euler"]

    min_fp = np.inf
    for f in range(macro.num_faces):
        tri = macro.vertices[macro.faces[f]]
        min_fp = min(min_fp, _barycentric_in_triangle(tri, wf.face_points[f]).min())
    min_z = np.inf
    for t in range(macro.num_tets):
        verts = macro.vertices[macro.tets[t]]
        min_z = min(min_z, _barycentric_in_tet(verts, wf.incenters[t]).min())
    checks["face_points_interior"] = min_fp > INTERIORITY_TOL
    checks["incenters_interior"] = min_z > INTERIORITY_TOL

    quality = mesh_quality(fine)
    return WfValidationReport(
        conformity_pass=bool(conformity),
        checks=checks,
        volume_residual=vol_residual,
        min_face_point_barycentric=float(min_fp),
        min_incenter_barycentric=float(min_z),
        min_shape_ratio=float(quality.ratio.min()),
        max_shape_ratio=float(quality.ratio.max()),
    )
