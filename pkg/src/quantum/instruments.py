"""
Quantum instruments: labeled Kraus families used as channels or measurements.

Operators may be dense matrices or any object exposing ``to_dense()`` (block
operators, density matrices). All numerics here run on the dense forms.
"""
from enum import Enum
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field
from scipy import linalg as sla

from src.config import config
from src.errors import (
    DimensionMismatchError,
    InvalidInstrumentError,
    OutcomeOutOfRangeError,
    ZeroProbabilityError,
)
from src.matrices import ComplexMatrix, MatrixPayload, hermitize
from src.quantum.rng import RngStream
from src.quantum.states import DensityMatrix


class InstrumentKind(str, Enum):
    """Channels discard outcome labels, measurements report them."""
    CHANNEL = "channel"
    MEASUREMENT = "measurement"


class LabeledOperator(NamedTuple):
    label: str
    operator: Any


def as_matrix(x: Any) -> ComplexMatrix:
    """Dense complex128 form of a matrix, density matrix or block operator."""
    if hasattr(x, "to_dense"):
        return np.asarray(x.to_dense(), dtype=np.complex128)
    return np.asarray(x, dtype=np.complex128)


def _as_state(rho: Any) -> DensityMatrix:
    if isinstance(rho, DensityMatrix):
        return rho
    return DensityMatrix(as_matrix(rho))


class QuantumInstrument:
    """A labeled family of operators {M_x} with sum_x M_x^dag M_x = 1."""

    def __init__(
        self,
        kind: Union[InstrumentKind, str],
        operators: Sequence[Union[LabeledOperator, Tuple[str, Any], Any]],
    ):
        """
        Initialize instrument.

        Args:
            kind: "channel" or "measurement"
            operators: Operators, either bare (labelled "0", "1", ...) or (label, operator) pairs

        Raises:
            DimensionMismatchError: If operators are not square or differ in shape
            InvalidInstrumentError: If the family is empty or labels repeat
        """
        self.kind = InstrumentKind(kind)
        labeled: List[LabeledOperator] = []
        for idx, item in enumerate(operators):
            if isinstance(item, tuple) and len(item) == 2 and isinstance(item[0], str):
                labeled.append(LabeledOperator(item[0], item[1]))
            else:
                labeled.append(LabeledOperator(str(idx), item))

        if not labeled:
            raise InvalidInstrumentError("Instrument needs at least one operator")

        labels = [op.label for op in labeled]
        if len(set(labels)) != len(labels):
            raise InvalidInstrumentError(f"Duplicate operator labels: {labels}")

        dense = [as_matrix(op.operator) for op in labeled]
        shape = dense[0].shape
        for op, mat in zip(labeled, dense):
            if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
                raise DimensionMismatchError(
                    f"Operator '{op.label}' is not square: shape {mat.shape}"
                )
            if mat.shape != shape:
                raise DimensionMismatchError(
                    f"Operator '{op.label}' has shape {mat.shape}, expected {shape}",
                    details={"label": op.label, "shape": list(mat.shape), "expected": list(shape)},
                )

        self._operators: Tuple[LabeledOperator, ...] = tuple(labeled)
        self._dense: Tuple[ComplexMatrix, ...] = tuple(dense)
        self._residual: Optional[float] = None

    @property
    def operators(self) -> Tuple[LabeledOperator, ...]:
        return self._operators

    @property
    def dense_operators(self) -> Tuple[ComplexMatrix, ...]:
        return self._dense

    @property
    def labels(self) -> List[str]:
        return [op.label for op in self._operators]

    @property
    def dim(self) -> int:
        return self._dense[0].shape[0]

    def index_of(self, outcome: Union[int, str]) -> int:
        """Position of an outcome given by position or label."""
        if isinstance(outcome, str):
            try:
                return self.labels.index(outcome)
            except ValueError:
                raise OutcomeOutOfRangeError(
                    f"Unknown outcome label '{outcome}'", details={"labels": self.labels}
                )
        if not 0 <= int(outcome) < len(self):
            raise OutcomeOutOfRangeError(
                f"Outcome index {outcome} out of range 0..{len(self) - 1}"
            )
        return int(outcome)

    def completeness_residual(self) -> float:
        """Frobenius norm of sum_x M_x^dag M_x - 1 (cached)."""
        if self._residual is None:
            total = sum(m.conj().T @ m for m in self._dense)
            self._residual = float(np.linalg.norm(total - np.eye(self.dim), ord="fro"))
        return self._residual

    def to_json(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "operators": [
                {"label": op.label, "matrix": MatrixPayload.from_array(mat).model_dump()}
                for op, mat in zip(self._operators, self._dense)
            ],
        }

    @classmethod
    def from_json(cls, obj: Dict[str, Any]) -> "QuantumInstrument":
        payload = InstrumentPayload.model_validate(obj)
        return cls(
            payload.kind,
            [(op.label, op.matrix.to_array()) for op in payload.operators],
        )

    def __len__(self) -> int:
        return len(self._operators)

    def __repr__(self) -> str:
        return (
            f"<QuantumInstrument kind={self.kind.value} dim={self.dim} "
            f"outcomes={len(self)}>"
        )


class LabeledMatrixPayload(BaseModel):
    label: str = Field(..., description="Outcome label")
    matrix: MatrixPayload = Field(..., description="Operator matrix")


class InstrumentPayload(BaseModel):
    """Wire form of an instrument."""
    kind: InstrumentKind = Field(..., description="channel or measurement")
    operators: List[LabeledMatrixPayload] = Field(..., min_length=1)


class InstrumentReport(BaseModel):
    """Positivity and completeness status of an instrument."""

    name: str = Field(default="", description="Human-readable instrument name")
    kind: InstrumentKind
    labels: List[str]
    positivity: List[bool] = Field(..., description="M^dag M >= 0 per operator")
    residual: float = Field(..., description="||sum M^dag M - 1||_F")
    tol: float
    passed: bool


class OutcomeDistribution:
    """Probabilities per outcome label; non-negative and normalized."""

    def __init__(self, labels: Sequence[str], probs: Sequence[float], tol: Optional[float] = None):
        """
        Raises:
            InvalidInstrumentError: If probabilities are negative or do not sum to 1
        """
        if tol is None:
            tol = config.tolerances.analytic

        probs = np.asarray(probs, dtype=float)
        if len(labels) != len(probs):
            raise DimensionMismatchError("Labels and probabilities differ in length")
        if probs.min() < -tol:
            raise InvalidInstrumentError(
                f"Negative outcome probability {probs.min():.3e}",
                details={"probs": probs.tolist()},
            )
        total = float(probs.sum())
        if abs(total - 1.0) > tol:
            raise InvalidInstrumentError(
                f"Outcome probabilities sum to {total:.12f}",
                details={"probs": probs.tolist()},
            )

        self.labels = list(labels)
        self.probs = np.clip(probs, 0.0, None)
        self.probs.setflags(write=False)

    def as_dict(self) -> Dict[str, float]:
        return {label: float(p) for label, p in zip(self.labels, self.probs)}

    def __getitem__(self, idx: int) -> float:
        return float(self.probs[idx])

    def __len__(self) -> int:
        return len(self.probs)

    def __repr__(self) -> str:
        return f"<OutcomeDistribution {self.as_dict()}>"


def validate_instrument(
    inst: QuantumInstrument, tol: Optional[float] = None, name: str = ""
) -> InstrumentReport:
    """
    Check positivity of each M^dag M and completeness of the family.

    Args:
        inst: Instrument to check
        tol: Completeness / positivity tolerance (default: analytic tolerance)
        name: Optional name echoed in the report

    Returns:
        InstrumentReport; passed iff the completeness residual is within tol
        and every M^dag M is positive
    """
    if tol is None:
        tol = config.tolerances.analytic

    positivity = []
    for m in inst.dense_operators:
        effect = hermitize(m.conj().T @ m)
        positivity.append(bool(sla.eigvalsh(effect)[0] >= -tol))

    residual = inst.completeness_residual()
    passed = residual <= tol and all(positivity)

    if not passed:
        logger.warning(f"Instrument '{name or inst.kind.value}' failed validation (residual {residual:.3e})")

    return InstrumentReport(
        name=name,
        kind=inst.kind,
        labels=inst.labels,
        positivity=positivity,
        residual=residual,
        tol=tol,
        passed=passed,
    )


def _require_complete(inst: QuantumInstrument) -> None:
    residual = inst.completeness_residual()
    if residual > config.tolerances.analytic:
        raise InvalidInstrumentError(
            f"Instrument is not complete (residual {residual:.3e})",
            details={"residual": residual},
        )


def _check_dims(inst: QuantumInstrument, rho: DensityMatrix) -> None:
    if inst.dim != rho.dim:
        raise DimensionMismatchError(
            f"Instrument acts on dimension {inst.dim}, state has dimension {rho.dim}",
            details={"instrument": inst.dim, "state": rho.dim},
        )


def outcome_distribution(inst: QuantumInstrument, rho: Any) -> OutcomeDistribution:
    """
    P[x] = Tr[M_x rho M_x^dag] for every outcome.

    Raises:
        InvalidInstrumentError: If the instrument is incomplete
        DimensionMismatchError: If dimensions disagree
    """
    rho = _as_state(rho)
    _require_complete(inst)
    _check_dims(inst, rho)

    probs = [float(np.real(np.trace(m @ rho.mat @ m.conj().T))) for m in inst.dense_operators]
    return OutcomeDistribution(inst.labels, probs)


def apply_outcome(
    inst: QuantumInstrument, rho: Any, outcome: Union[int, str]
) -> Tuple[DensityMatrix, float]:
    """
    Post-measurement state M_x rho M_x^dag / P[x] and its probability.

    Raises:
        ZeroProbabilityError: If P[x] is below the zero-probability threshold
    """
    rho = _as_state(rho)
    _check_dims(inst, rho)
    idx = inst.index_of(outcome)
    m = inst.dense_operators[idx]

    unnormalized = m @ rho.mat @ m.conj().T
    prob = float(np.real(np.trace(unnormalized)))
    if prob <= config.tolerances.zero_probability:
        raise ZeroProbabilityError(
            f"Outcome '{inst.labels[idx]}' has probability {prob:.3e}",
            details={"outcome": inst.labels[idx], "probability": prob},
        )
    return DensityMatrix.from_unnormalized(unnormalized), prob


def sample_index(probs: Sequence[float], u: float) -> int:
    """
    Inverse-CDF selection of an outcome for a uniform draw u in [0, 1).

    Rounding may leave the cumulative sum just below 1; draws beyond it fall on
    the last outcome with non-zero probability.
    """
    probs = np.asarray(probs, dtype=float)
    cdf = np.cumsum(probs)
    idx = int(np.searchsorted(cdf, u, side="right"))
    if idx >= len(probs):
        nonzero = np.flatnonzero(probs > 0)
        idx = int(nonzero[-1]) if len(nonzero) else len(probs) - 1
    return idx


def sample_outcome(inst: QuantumInstrument, rho: Any, stream: RngStream) -> str:
    """Sample an outcome label; deterministic for a given stream."""
    dist = outcome_distribution(inst, rho)
    return inst.labels[sample_index(dist.probs, stream.uniform())]


def apply_channel(inst: QuantumInstrument, rho: Any) -> DensityMatrix:
    """
    Sum_x K_x rho K_x^dag, then clip rounding-level negative eigenvalues.

    Raises:
        InvalidInstrumentError: If the Kraus family is incomplete
    """
    rho = _as_state(rho)
    _require_complete(inst)
    _check_dims(inst, rho)

    out = sum(k @ rho.mat @ k.conj().T for k in inst.dense_operators)
    return DensityMatrix.from_unnormalized(out)
