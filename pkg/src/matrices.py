"""
Dense complex-matrix primitives shared by every package.

Holds the ComplexMatrix alias, its JSON wire form, and the Hermitian helpers
(square roots, inverse square roots) built on scipy's eigh.
"""
from typing import Any, Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator
from scipy import linalg as sla

ComplexMatrix = np.ndarray


class MatrixPayload(BaseModel):
    """Wire form of a dense complex matrix."""

    rows: int = Field(..., ge=1, description="Number of rows")
    cols: int = Field(..., ge=1, description="Number of columns")
    data: List[Tuple[float, float]] = Field(
        ...,
        description="Row-major [re, im] pairs, rows * cols entries",
    )

    @model_validator(mode="after")
    def check_size(self) -> "MatrixPayload":
        """Validate that data holds exactly rows * cols entries."""
        if len(self.data) != self.rows * self.cols:
            raise ValueError(
                f"Matrix data has {len(self.data)} entries, expected {self.rows * self.cols}"
            )
        return self

    def to_array(self) -> ComplexMatrix:
        flat = np.array(self.data, dtype=float).reshape(-1, 2)
        return (flat[:, 0] + 1j * flat[:, 1]).reshape(self.rows, self.cols)

    @classmethod
    def from_array(cls, m: ComplexMatrix) -> "MatrixPayload":
        m = np.atleast_2d(np.asarray(m, dtype=np.complex128))
        return cls(
            rows=m.shape[0],
            cols=m.shape[1],
            data=[(float(z.real), float(z.imag)) for z in m.reshape(-1)],
        )


def encode_matrix(m: ComplexMatrix) -> Dict[str, Any]:
    return MatrixPayload.from_array(m).model_dump()


def decode_matrix(obj: Dict[str, Any]) -> ComplexMatrix:
    return MatrixPayload.model_validate(obj).to_array()


def dagger(m: ComplexMatrix) -> ComplexMatrix:
    return m.conj().T


def hermitize(m: ComplexMatrix) -> ComplexMatrix:
    """Hermitian part (m + m^dag) / 2."""
    return 0.5 * (m + m.conj().T)


def hermiticity_residual(m: ComplexMatrix) -> float:
    """Max-norm of m - m^dag."""
    return float(np.max(np.abs(m - m.conj().T)))


def psd_sqrt(m: ComplexMatrix) -> ComplexMatrix:
    """Hermitian PSD square root; small negative eigenvalues are clipped to 0."""
    vals, vecs = sla.eigh(hermitize(m))
    roots = np.sqrt(np.clip(vals, 0.0, None))
    return (vecs * roots) @ vecs.conj().T


def psd_inv_sqrt(m: ComplexMatrix) -> ComplexMatrix:
    """Inverse square root of a positive-definite Hermitian matrix."""
    vals, vecs = sla.eigh(hermitize(m))
    if vals.min() <= 0:
        raise np.linalg.LinAlgError("Matrix is not positive definite")
    return (vecs / np.sqrt(vals)) @ vecs.conj().T


def min_eigenvalue(m: ComplexMatrix) -> float:
    """Smallest eigenvalue of the Hermitian part of m."""
    return float(sla.eigvalsh(hermitize(m))[0])

