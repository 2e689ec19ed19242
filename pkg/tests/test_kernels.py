import numpy as np
import pytest

from wfmaxwell._kernels import available_backends, backend_name, get_backend
from wfmaxwell.fem import build_dof_map, quadrature, reference_basis
from wfmaxwell.fem.assemble import _geometry
from wfmaxwell.mesh import build_box_mesh, unit_cube


def test_backend_registry():
    assert backend_name() in ("compiled", "numpy")
    assert "numpy" in available_backends()
    with pytest.raises(ValueError):
        get_backend("gpu")


@pytest.mark.skipif(
    "compiled" not in available_backends(), reason="compiled kernels not built"
)
@pytest.mark.parametrize("k", [1, 2, 3])
def test_backend_parity(k):
    mesh = build_box_mesh(unit_cube(), 2)
    build_dof_map(mesh, k)
    basis = reference_basis(k)
    quad = quadrature(2 * k)
    _, gref = basis.tabulate(quad.points)
    gref = np.ascontiguousarray(gref)
    jinv, detj = _geometry(mesh)

    fast = get_backend("compiled").curl_curl_local(gref, quad.weights, jinv, detj)
    slow = get_backend("numpy").curl_curl_local(gref, quad.weights, jinv, detj)
    scale = np.abs(slow).max()
    assert np.max(np.abs(fast - slow)) <= 1e-13 * scale


@pytest.mark.skipif(
    "compiled" not in available_backends(), reason="compiled kernels not built"
)
def test_local_blocks_symmetric_up_to_rounding():
    mesh = build_box_mesh(unit_cube(), 1)
    basis = reference_basis(2)
    quad = quadrature(4)
    _, gref = basis.tabulate(quad.points)
    gref = np.ascontiguousarray(gref)
    jinv, detj = _geometry(mesh)
    kloc = get_backend("compiled").curl_curl_local(gref, quad.weights, jinv, detj)
    asym = np.max(np.abs(kloc - kloc.transpose(0, 2, 1)))
    assert asym <= 1e-13 * np.abs(kloc).max()
