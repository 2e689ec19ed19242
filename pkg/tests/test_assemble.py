import numpy as np
import pytest
import scipy.sparse.linalg as spla
from scipy.linalg import cho_factor, eigvalsh

from wfmaxwell.fem import (
    SymmetricSparseMatrix,
    assemble_curl_curl,
    assemble_mass,
    build_dof_map,
    quadrature,
    reference_basis,
)
from wfmaxwell.fem.assemble import interpolate_field
from wfmaxwell.mesh import Mesh, build_box_mesh, unit_cube


def setup(k, n=1, box=None):
    m = build_box_mesh(box or unit_cube(), n)
    dof = build_dof_map(m, k)
    basis = reference_basis(k)
    quad = quadrature(2 * k)
    K = assemble_curl_curl(m, dof, basis, quad)
    M = assemble_mass(m, dof, basis, quad)
    return m, dof, K, M


@pytest.mark.parametrize("k", [1, 2, 3])
def test_constant_fields_in_kernel(k):
    _, dof, K, M = setup(k)
    for direction in np.eye(3):
        v = interpolate_field(dof, lambda p, d=direction: np.tile(d, (len(p), 1)))
        assert np.max(np.abs(K @ v)) <= 1e-12 * K.norm_max()


@pytest.mark.parametrize("k", [2, 3])
def test_grad_xyz_in_kernel(k):
    _, dof, K, _ = setup(k)
    v = interpolate_field(
        dof, lambda p: np.column_stack([p[:, 1] * p[:, 2], p[:, 0] * p[:, 2], p[:, 0] * p[:, 1]])
    )
    assert np.max(np.abs(K @ v)) <= 1e-12 * K.norm_max()


@pytest.mark.parametrize("k", [1, 2])
def test_rotational_field_energy(k):
    # curl(-y, x, 0) = (0, 0, 2), so the energy is 4 |Omega|
    _, dof, K, _ = setup(k, n=2)
    v = interpolate_field(dof, lambda p: np.column_stack([-p[:, 1], p[:, 0], np.zeros(len(p))]))
    assert v @ (K @ v) == pytest.approx(4.0, rel=1e-12)


@pytest.mark.parametrize("k", [1, 2])
def test_mass_quadratic_forms(k):
    _, dof, _, M = setup(k, n=2)
    ones_x = interpolate_field(dof, lambda p: np.column_stack([np.ones(len(p))] + [np.zeros(len(p))] * 2))
    assert ones_x @ (M @ ones_x) == pytest.approx(1.0, rel=1e-12)
    ones = interpolate_field(dof, lambda p: np.ones((len(p), 3)))
    assert ones @ (M @ ones) == pytest.approx(3.0, rel=1e-12)
    linear = interpolate_field(
        dof, lambda p: np.column_stack([p[:, 0], np.zeros(len(p)), np.zeros(len(p))])
    )
    assert linear @ (M @ linear) == pytest.approx(1.0 / 3.0, rel=1e-12)


@pytest.mark.parametrize("k", [1, 2])
def test_gradient_kernel_test_set(k):
    _, dof, K, _ = setup(k, n=2)
    polys = {
        "x": lambda p: np.column_stack([np.ones(len(p)), np.zeros(len(p)), np.zeros(len(p))]),
        "y": lambda p: np.column_stack([np.zeros(len(p)), np.ones(len(p)), np.zeros(len(p))]),
        "z": lambda p: np.column_stack([np.zeros(len(p)), np.zeros(len(p)), np.ones(len(p))]),
        "x^2": lambda p: np.column_stack([2 * p[:, 0], np.zeros(len(p)), np.zeros(len(p))]),
        "xy": lambda p: np.column_stack([p[:, 1], p[:, 0], np.zeros(len(p))]),
    }
    if k >= 2:
        polys["xyz"] = lambda p: np.column_stack(
            [p[:, 1] * p[:, 2], p[:, 0] * p[:, 2], p[:, 0] * p[:, 1]]
        )
    for name, grad in polys.items():
        v = interpolate_field(dof, grad)
        assert np.max(np.abs(K @ v)) <= 1e-12 * K.norm_max(), name


@pytest.mark.parametrize("k", [1, 2])
def test_spd_properties(k):
    _, _, K, M = setup(k)
    Kd = K.toarray()
    assert np.array_equal(Kd, Kd.T)  # exact symmetry by construction
    assert eigvalsh(Kd).min() >= -1e-12 * K.norm_max()
    cho_factor(M.toarray())  # positive definite


def test_scale_covariance():
    box_small = unit_cube()
    m1, dof1, K1, M1 = setup(2, n=1, box=box_small)
    s = 2.5
    from wfmaxwell.mesh import Box

    box_big = Box((0, 0, 0), (s, s, s))
    m2, dof2, K2, M2 = setup(2, n=1, box=box_big)
    assert K2.norm_max() == pytest.approx(s * K1.norm_max(), rel=1e-12)
    assert M2.norm_max() == pytest.approx(s**3 * M1.norm_max(), rel=1e-12)
    d1 = (K1.to_csr() * s - K2.to_csr()).toarray()
    assert np.max(np.abs(d1)) <= 1e-12 * K2.norm_max()
    d2 = (M1.to_csr() * s**3 - M2.to_csr()).toarray()
    assert np.max(np.abs(d2)) <= 1e-12 * M2.norm_max()


def test_determinism():
    _, _, K1, M1 = setup(2, n=2)
    _, _, K2, M2 = setup(2, n=2)
    assert np.array_equal(K1.upper.data, K2.upper.data)
    assert np.array_equal(K1.upper.indices, K2.upper.indices)
    assert np.array_equal(M1.upper.data, M2.upper.data)


def test_quadrature_degree_preconditions():
    m = build_box_mesh(unit_cube(), 1)
    dof = build_dof_map(m, 2)
    basis = reference_basis(2)
    with pytest.raises(ValueError):
        assemble_curl_curl(m, dof, basis, quadrature(1))
    with pytest.raises(ValueError):
        assemble_mass(m, dof, basis, quadrature(3))


def test_dump_format(tmp_path):
    _, _, K, _ = setup(1)
    path = tmp_path / "K.txt"
    K.dump(path)
    lines = path.read_text().splitlines()
    assert len(lines) == K.nnz
    prev = (-1, -1)
    for line in lines:
        si, sj, sv = line.split()
        i, j = int(si), int(sj)
        float(sv)
        assert i <= j
        assert (i, j) > prev
        prev = (i, j)


def test_triplet_validation():
    with pytest.raises(ValueError):
        SymmetricSparseMatrix.from_triplets(3, [1], [0], [2.0])


def test_matvec_matches_dense():
    _, _, K, _ = setup(2)
    rng = np.random.default_rng(0)
    x = rng.standard_normal(K.dim)
    assert np.allclose(K @ x, K.toarray() @ x, atol=1e-12)
    assert spla.norm(K.to_csr() - K.to_csr().T) == 0.0
