"""Lagrange finite elements on tetrahedra: bases, quadrature, DOFs, assembly."""

from .assemble import SymmetricSparseMatrix, assemble_curl_curl, assemble_mass
from .basis import ReferenceBasis, reference_basis
from .dofmap import DofMap, build_dof_map
from .quadrature import QuadratureRule, quadrature

__all__ = [
    "SymmetricSparseMatrix",
    "assemble_curl_curl",
    "assemble_mass",
    "ReferenceBasis",
    "reference_basis",
    "DofMap",
    "build_dof_map",
    "QuadratureRule",
    "quadrature",
]
