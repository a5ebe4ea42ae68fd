"""Congruence diagonalization of symmetric matrices along a nice tree decomposition."""

from .boxes import Box, DiagonalArray, OpCounter, congruent_diagonal
from .field import RATIONAL, RationalField, RealField, get_field
from .matrix import SparseSymmetricMatrix, UnderlyingGraph, load_matrix, read_matrix
from .spectral import (Inertia, InvalidInterval, count_eigenvalues_in, count_eigenvalues_leq,
                       determinant, inertia, rank)
from .treedecomp import (Kind, NiceTreeDecomposition, TreeDecomposition, as_nice, load_td, nicify,
                         read_td, validate)

__all__ = [
    "Box", "DiagonalArray", "OpCounter", "congruent_diagonal",
    "RATIONAL", "RationalField", "RealField", "get_field",
    "SparseSymmetricMatrix", "UnderlyingGraph", "load_matrix", "read_matrix",
    "Inertia", "InvalidInterval", "count_eigenvalues_in", "count_eigenvalues_leq",
    "determinant", "inertia", "rank",
    "Kind", "NiceTreeDecomposition", "TreeDecomposition", "as_nice", "load_td", "nicify",
    "read_td", "validate",
]

__version__ = "0.1.0"
