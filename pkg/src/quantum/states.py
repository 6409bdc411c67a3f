"""
Density matrices.
"""
from typing import Optional

import numpy as np
from scipy import linalg as sla

from src.config import config
from src.errors import InvalidStateError
from src.matrices import ComplexMatrix, hermitize, hermiticity_residual


class DensityMatrix:
    """Hermitian, positive-semidefinite, unit-trace matrix."""

    __slots__ = ("_mat",)

    def __init__(self, mat: ComplexMatrix, tol: Optional[float] = None):
        """
        Wrap and validate a density matrix.

        Args:
            mat: Square complex matrix
            tol: Tolerance for Hermiticity, positivity and trace (default from config)

        Raises:
            InvalidStateError: If any invariant fails
        """
        if tol is None:
            tol = config.tolerances.hermiticity

        arr = np.array(mat, dtype=np.complex128)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise InvalidStateError(f"Density matrix must be square, got shape {arr.shape}")

        residual = hermiticity_residual(arr)
        if residual > tol:
            raise InvalidStateError(
                f"Density matrix is not Hermitian (residual {residual:.3e})",
                details={"hermiticity_residual": residual},
            )

        trace = float(np.real(np.trace(arr)))
        if abs(trace - 1.0) > tol:
            raise InvalidStateError(
                f"Density matrix trace is {trace:.12f}, expected 1",
                details={"trace": trace},
            )

        min_eig = float(sla.eigvalsh(hermitize(arr))[0])
        if min_eig < -tol:
            raise InvalidStateError(
                f"Density matrix has negative eigenvalue {min_eig:.3e}",
                details={"min_eigenvalue": min_eig},
            )

        arr.setflags(write=False)
        self._mat = arr

    @property
    def mat(self) -> ComplexMatrix:
        return self._mat

    @property
    def dim(self) -> int:
        return self._mat.shape[0]

    def to_dense(self) -> ComplexMatrix:
        return self._mat

    @classmethod
    def from_pure(cls, vec: np.ndarray) -> "DensityMatrix":
        """|psi><psi| from a (not necessarily normalized) state vector."""
        v = np.asarray(vec, dtype=np.complex128).reshape(-1)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise InvalidStateError("Cannot build a state from the zero vector")
        v = v / norm
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=np.complex128) / dim)

    @classmethod
    def from_unnormalized(cls, mat: ComplexMatrix, tol: Optional[float] = None) -> "DensityMatrix":
        """
        Hermitize, clip rounding-level negative eigenvalues and renormalize.

        Eigenvalues in [-tol, 0) are set to 0; anything more negative is left in
        place so validation reports it.

        Raises:
            InvalidStateError: If the trace vanishes or the result is still invalid
        """
        if tol is None:
            tol = config.tolerances.hermiticity

        h = hermitize(np.asarray(mat, dtype=np.complex128))
        vals, vecs = sla.eigh(h)
        if vals[0] < 0:
            vals = np.where((vals < 0) & (vals >= -tol), 0.0, vals)
            h = (vecs * vals) @ vecs.conj().T

        trace = float(np.real(np.trace(h)))
        if trace <= 0:
            raise InvalidStateError(
                f"Cannot normalize an operator with trace {trace:.3e}",
                details={"trace": trace},
            )
        return cls(h / trace, tol=tol)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DensityMatrix):
            return NotImplemented
        return np.array_equal(self._mat, other._mat)

    __hash__ = None

    def __repr__(self) -> str:
        purity = float(np.real(np.trace(self._mat @ self._mat)))
        return f"<DensityMatrix dim={self.dim} purity={purity:.4f}>"
