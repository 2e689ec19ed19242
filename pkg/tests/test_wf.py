import numpy as np
import pytest

from wfmaxwell.errors import DegenerateElementError, InvalidSplitError
from wfmaxwell.mesh import Mesh, build_box_mesh, mesh_quality, pi_cube, unit_cube
from wfmaxwell.wf import (
    WorseyFarinMesh,
    face_split_point,
    incenter,
    validate_wf,
    worsey_farin_refine,
)

REFERENCE_TET = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
C = 1.0 / (3.0 + np.sqrt(3.0))


def plane_distances(verts, point):
    """Oracle: unsigned distances from a point to the four face planes."""
    dists = []
    for i in range(4):
        tri = verts[[j for j in range(4) if j != i]]
        n = np.cross(tri[1] - tri[0], tri[2] - tri[0])
        n = n / np.linalg.norm(n)
        dists.append(abs(n @ (point - tri[0])))
    return np.array(dists)


def random_well_shaped_tet(rng):
    while True:
        verts = rng.uniform(-1.0, 1.0, size=(4, 3))
        try:
            m = Mesh(verts, np.array([[0, 1, 2, 3]]))
        except Exception:
            continue
        if mesh_quality(m).ratio[0] < 8.0:
            return m.vertices


def test_incenter_regular_tet_is_centroid():
    verts = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    z = incenter(verts)
    assert np.allclose(z, verts.mean(axis=0), atol=1e-14)


def test_incenter_reference_tet():
    z = incenter(REFERENCE_TET)
    assert np.allclose(z, [C, C, C], atol=1e-12)
    d = plane_distances(REFERENCE_TET, z)
    assert np.ptp(d) <= 1e-14


def test_incenter_equidistant_random():
    rng = np.random.default_rng(42)
    for _ in range(100):
        verts = random_well_shaped_tet(rng)
        z = incenter(verts)
        d = plane_distances(verts, z)
        assert np.ptp(d) <= 1e-12
        # distance equals rho_T / 2
        m = Mesh(verts, np.array([[0, 1, 2, 3]]))
        rho = mesh_quality(m).rho[0]
        assert d[0] == pytest.approx(rho / 2.0, rel=1e-10)


def test_incenter_flat_tet_rejected():
    flat = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]], dtype=float)
    with pytest.raises(DegenerateElementError):
        incenter(flat)


def test_face_split_boundary_barycenter():
    tri = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float)
    assert np.allclose(face_split_point(tri), [1 / 3, 1 / 3, 0], atol=1e-15)


def test_face_split_mirror_pair():
    tri = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float)
    z1 = incenter(REFERENCE_TET)
    mirrored = REFERENCE_TET * np.array([1, 1, -1])
    z2 = incenter(mirrored)
    m = face_split_point(tri, z1, z2)
    assert np.allclose(m, [C, C, 0.0], atol=1e-12)


def test_face_split_error_paths():
    tri = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float)
    # segment exits through an edge of the face
    with pytest.raises(InvalidSplitError):
        face_split_point(tri, [2.0, 2.0, 0.5], [2.0, 2.0, -0.5])
    # segment parallel to the face plane
    with pytest.raises(InvalidSplitError):
        face_split_point(tri, [0.2, 0.2, 0.5], [0.3, 0.3, 0.5])
    # segment on one side only
    with pytest.raises(InvalidSplitError):
        face_split_point(tri, [0.2, 0.2, 0.5], [0.2, 0.2, 0.1])


def test_refine_single_tet():
    m = Mesh(REFERENCE_TET, np.array([[0, 1, 2, 3]]))
    wf = worsey_farin_refine(m)
    assert wf.fine.num_tets == 12
    assert wf.fine.num_vertices == 4 + 1 + 4
    assert wf.fine.tet_volumes.sum() == pytest.approx(m.tet_volumes.sum(), rel=1e-13)
    assert wf.children.shape == (1, 12)


def test_refine_two_tets_shared_face_conforms():
    verts = np.vstack([REFERENCE_TET, [[0, 0, -1]]])
    m = Mesh(verts, np.array([[0, 1, 2, 3], [0, 1, 2, 4]]))
    wf = worsey_farin_refine(m)
    assert wf.fine.num_tets == 24
    shared = int(np.nonzero(~m.boundary_face_mask)[0][0])
    keys = {tuple(wf.fine.faces[fid]) for fid in wf.face_children[shared]}
    assert len(keys) == 3
    # both macro tets see the same three fine faces: each has 2 incident tets
    for fid in wf.face_children[shared]:
        assert (wf.fine.face_tets[fid] >= 0).all()


def test_refine_unit_cube_counts():
    m = build_box_mesh(unit_cube(), 1)
    wf = worsey_farin_refine(m)
    assert wf.fine.num_tets == 72
    assert wf.fine.num_vertices == 8 + 6 + 18 == 32


@pytest.mark.parametrize("n", [1, 2])
def test_refine_vertex_count_formula(n):
    m = build_box_mesh(pi_cube(), n)
    wf = worsey_farin_refine(m)
    assert wf.fine.num_vertices == m.num_vertices + m.num_tets + m.num_faces
    assert int(wf.fine.boundary_face_mask.sum()) == 3 * int(m.boundary_face_mask.sum())
    assert np.all(wf.fine.tet_volumes > 0)


def test_refine_commutes_with_rigid_motion():
    m = build_box_mesh(unit_cube(), 1)
    wf = worsey_farin_refine(m)

    theta = 0.7
    rot_z = np.array(
        [[np.cos(theta), -np.sin(theta), 0], [np.sin(theta), np.cos(theta), 0], [0, 0, 1]]
    )
    phi = 0.3
    rot_x = np.array(
        [[1, 0, 0], [0, np.cos(phi), -np.sin(phi)], [0, np.sin(phi), np.cos(phi)]]
    )
    rot = rot_x @ rot_z
    shift = np.array([0.3, -1.2, 2.5])

    moved = Mesh(m.vertices @ rot.T + shift, m.tets)
    wf_moved = worsey_farin_refine(moved)
    expected = wf.fine.vertices @ rot.T + shift
    assert np.max(np.abs(wf_moved.fine.vertices - expected)) <= 1e-12
    assert np.array_equal(wf_moved.fine.tets, wf.fine.tets)


def test_refine_deterministic():
    m = build_box_mesh(pi_cube(), 2)
    a = worsey_farin_refine(m)
    b = worsey_farin_refine(m)
    assert np.array_equal(a.fine.vertices, b.fine.vertices)
    assert np.array_equal(a.fine.tets, b.fine.tets)
    assert np.array_equal(a.face_children, b.face_children)


@pytest.mark.parametrize("n", [1, 2])
def test_validate_clean(n):
    wf = worsey_farin_refine(build_box_mesh(pi_cube(), n))
    rep = validate_wf(wf)
    assert rep.conformity_pass
    assert rep.passed
    assert rep.volume_residual <= 1e-12
    assert np.isfinite(rep.max_shape_ratio)
    assert rep.max_shape_ratio >= rep.min_shape_ratio > 0


def test_validate_detects_corruption():
    wf = worsey_farin_refine(build_box_mesh(unit_cube(), 1))
    tets = wf.fine.tets.copy()
    # swap the incenter of child 0 for an unrelated original vertex
    original = tets[0, 0]
    replacement = (set(range(8)) - set(tets[0].tolist())).pop()
    tets[0, 0] = replacement
    try:
        corrupt_fine = Mesh(wf.fine.vertices, tets, box=wf.fine.box)
    except Exception:
        return  # corruption already rejected at construction
    corrupt = WorseyFarinMesh(
        macro=wf.macro,
        fine=corrupt_fine,
        incenters=wf.incenters,
        face_points=wf.face_points,
        children=wf.children,
        face_children=wf.face_children,
    )
    rep = validate_wf(corrupt)
    assert not rep.passed
    del original


def test_report_lines_format():
    wf = worsey_farin_refine(build_box_mesh(unit_cube(), 1))
    lines = validate_wf(wf).lines()
    assert any(line.startswith("conformity:") for line in lines)
    assert all(":" in line for line in lines)
