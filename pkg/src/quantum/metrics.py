"""
State comparison metrics and the ancilla partial trace.
"""
from typing import Any

import numpy as np
from scipy import linalg as sla

from src.errors import DimensionMismatchError
from src.matrices import ComplexMatrix, hermitize, psd_sqrt
from src.quantum.instruments import as_matrix

# Eigenvalues below this (relative to the largest) are rounding noise.
_EIGEN_FLOOR = 1e-14


def _pair(rho: Any, sigma: Any):
    a, b = as_matrix(rho), as_matrix(sigma)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"States differ in shape: {a.shape} vs {b.shape}")
    return a, b


def fidelity(rho: Any, sigma: Any) -> float:
    """
    Uhlmann fidelity tr sqrt(sqrt(rho) sigma sqrt(rho)), clipped to [0, 1].

    Equals 1 iff rho == sigma and 0 iff the supports are orthogonal.
    """
    a, b = _pair(rho, sigma)
    root = psd_sqrt(a)
    vals = sla.eigvalsh(hermitize(root @ b @ root))
    floor = _EIGEN_FLOOR * max(float(vals[-1]), 1.0)
    vals = np.where(vals < floor, 0.0, vals)
    return float(np.clip(np.sum(np.sqrt(vals)), 0.0, 1.0))


def trace_distance(rho: Any, sigma: Any) -> float:
    """(1/2) ||rho - sigma||_1, clipped to [0, 1]."""
    a, b = _pair(rho, sigma)
    vals = sla.eigvalsh(hermitize(a - b))
    return float(np.clip(0.5 * np.sum(np.abs(vals)), 0.0, 1.0))


def partial_trace_ancilla(mat: ComplexMatrix, dim: int) -> ComplexMatrix:
    """
    Trace out a trailing qubit from a (system x ancilla) operator.

    Args:
        mat: 2d x 2d operator in system (x) ancilla ordering (index = s*2 + a)
        dim: System dimension d

    Returns:
        d x d reduced operator
    """
    mat = as_matrix(mat)
    if mat.shape != (2 * dim, 2 * dim):
        raise DimensionMismatchError(
            f"Expected a {2 * dim} x {2 * dim} operator, got shape {mat.shape}"
        )
    return np.einsum("iaja->ij", mat.reshape(dim, 2, dim, 2))
