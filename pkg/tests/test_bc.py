import numpy as np
import pytest
from scipy.linalg import cho_factor

from wfmaxwell.bc import apply_constraints, build_tangential_constraints, identity_constraints
from wfmaxwell.fem import (
    assemble_curl_curl,
    assemble_mass,
    build_dof_map,
    quadrature,
    reference_basis,
)
from wfmaxwell.mesh import build_box_mesh, pi_cube, unit_cube
from wfmaxwell.wf import worsey_farin_refine


def pipeline(n=2, k=1, wf=False, box=None):
    mesh = build_box_mesh(box or pi_cube(), n)
    if wf:
        mesh = worsey_farin_refine(mesh).fine
    dof = build_dof_map(mesh, k)
    basis = reference_basis(k)
    quad = quadrature(2 * k)
    K = assemble_curl_curl(mesh, dof, basis, quad)
    M = assemble_mass(mesh, dof, basis, quad)
    return mesh, dof, K, M


def test_reduced_dim_n2_k1():
    mesh, dof, _, _ = pipeline(n=2, k=1)
    cs = build_tangential_constraints(mesh, dof)
    # 1 interior node (f=3), 6 face centers (f=1), 12 edge + 8 corner nodes (f=0)
    assert cs.reduced_dim == 3 * 1 + 1 * 6 == 9


def test_reduced_dim_n1_all_corners():
    mesh, dof, _, _ = pipeline(n=1, k=1)
    cs = build_tangential_constraints(mesh, dof)
    assert cs.reduced_dim == 0


def test_reduction_orthonormal():
    mesh, dof, _, _ = pipeline(n=2, k=2)
    cs = build_tangential_constraints(mesh, dof)
    R = cs.reduction
    gram = (R.T @ R).toarray()
    assert np.max(np.abs(gram - np.eye(cs.reduced_dim))) <= 1e-14


def test_frames_orthonormal_and_span():
    mesh, dof, _, _ = pipeline(n=2, k=2)
    cs = build_tangential_constraints(mesh, dof)
    for nc in cs.constraints:
        frame = np.vstack([nc.free, nc.constrained])
        assert frame.shape == (3, 3)
        assert np.max(np.abs(frame @ frame.T - np.eye(3))) <= 1e-14
        assert nc.num_free in (0, 1, 3)


def test_reduced_fields_are_tangential_free():
    """Fields in range(R) have vanishing tangential part at boundary nodes."""
    mesh, dof, _, _ = pipeline(n=2, k=2, wf=True)
    cs = build_tangential_constraints(mesh, dof)
    rng = np.random.default_rng(5)
    u = (cs.reduction @ rng.standard_normal(cs.reduced_dim)).reshape(-1, 3)
    for f in np.nonzero(mesh.boundary_face_mask)[0]:
        normal = mesh.face_normal(int(f))
        for nc in cs.constraints:
            if nc.num_free == 3:
                continue
            vec = u[nc.node]
            if nc.num_free == 0:
                assert np.linalg.norm(vec) <= 1e-12
            else:
                tangential = vec - (vec @ nc.free[0]) * nc.free[0]
                assert np.linalg.norm(tangential) <= 1e-12
        break  # frame algebra is nodewise; one face suffices with the loop above


def test_wf_face_points_free_dim_one():
    mesh, dof, _, _ = pipeline(n=1, k=1, wf=True)
    cs = build_tangential_constraints(mesh, dof)
    wf = worsey_farin_refine(build_box_mesh(pi_cube(), 1))
    start = wf.face_point_vertex
    for f in np.nonzero(wf.macro.boundary_face_mask)[0]:
        node = start + int(f)
        assert cs.constraints[node].num_free == 1


def test_apply_identity():
    mesh, dof, K, M = pipeline(n=1, k=1)
    cs = identity_constraints(dof)
    K_red, M_red = apply_constraints(K, M, cs)
    assert np.array_equal(K_red.toarray(), K.toarray())
    assert np.array_equal(M_red.toarray(), M.toarray())


def test_apply_empty_reduction():
    mesh, dof, K, M = pipeline(n=1, k=1)
    cs = build_tangential_constraints(mesh, dof)
    K_red, M_red = apply_constraints(K, M, cs)
    assert K_red.dim == 0 and M_red.dim == 0
    assert K_red.toarray().shape == (0, 0)


def test_reduced_mass_positive_definite():
    mesh, dof, K, M = pipeline(n=2, k=1)
    cs = build_tangential_constraints(mesh, dof)
    K_red, M_red = apply_constraints(K, M, cs)
    assert K_red.dim == 9
    cho_factor(M_red.toarray())
    Kd = K_red.toarray()
    assert np.array_equal(Kd, Kd.T)


def test_dimension_mismatch():
    mesh, dof, K, M = pipeline(n=1, k=1)
    mesh2, dof2, _, _ = pipeline(n=2, k=1)
    cs = build_tangential_constraints(mesh2, dof2)
    with pytest.raises(ValueError):
        apply_constraints(K, M, cs)


def test_reduced_dim_cross_check_positions():
    """Free-direction count must match the box-plane classification per node."""
    from wfmaxwell.mesh import box_plane_normals

    mesh, dof, _, _ = pipeline(n=2, k=2)
    cs = build_tangential_constraints(mesh, dof)
    hits = box_plane_normals(mesh.box, dof.positions)
    for nc in cs.constraints:
        n_planes = len(hits[nc.node])
        expected = {0: 3, 1: 1, 2: 0, 3: 0}[n_planes]
        assert nc.num_free == expected
    assert cs.reduced_dim == sum(nc.num_free for nc in cs.constraints)


def test_general_box_frames():
    from wfmaxwell.mesh import Box

    box = Box((0.0, -1.0, 2.0), (2.0, 3.0, 2.5))
    mesh, dof, _, _ = pipeline(n=2, k=1, box=box)
    cs = build_tangential_constraints(mesh, dof)
    assert cs.reduced_dim == 9
