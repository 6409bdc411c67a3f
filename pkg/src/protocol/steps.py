"""
Pipeline steps on block operators: embedding, quasi-copy, outer measurement
and the outcome-independent recovery measurement.
"""
import math
from typing import Any, Tuple

import numpy as np

from src.errors import QuasiCopyPreconditionError
from src.linalg import BlockOperator, block_trace, box_plus, direct_sum, scale
from src.matrices import ComplexMatrix
from src.protocol.models import ProtocolConfig
from src.quantum import DensityMatrix, InstrumentKind, QuantumInstrument

MU0 = "mu0"
MU1 = "mu1"


def _state(rho: Any) -> DensityMatrix:
    return rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho)


def embed_with_ancilla(rho: Any) -> BlockOperator:
    """
    rho (+) 0: the system state placed in H_d with nothing in H_d^perp.

    Raises:
        InvalidStateError: If rho is not a valid density matrix
    """
    rho = _state(rho)
    return BlockOperator(rho.dim, diag_top=rho.mat)


def quasi_copy_kraus(phi: float, d: int) -> Tuple[BlockOperator, BlockOperator]:
    """
    K0 = (cos phi 1) (+) 0 + (sin phi 1) [+] 0
    K1 = 0 (+) (-cos phi 1) + 0 [+] (sin phi 1)
    """
    c, s = math.cos(phi), math.sin(phi)
    eye = np.eye(d, dtype=np.complex128)
    zero = np.zeros((d, d), dtype=np.complex128)
    k0 = direct_sum(c * eye, zero) + box_plus(s * eye, zero)
    # Sign of the cos term is a global phase of the K1 branch.
    k1 = direct_sum(zero, -c * eye) + box_plus(zero, s * eye)
    return k0, k1


def quasi_copy_channel(phi: float, d: int) -> QuantumInstrument:
    """The quasi-copy channel E as a two-operator Kraus family."""
    k0, k1 = quasi_copy_kraus(phi, d)
    return QuantumInstrument(InstrumentKind.CHANNEL, [("K0", k0), ("K1", k1)])


def apply_quasi_copy(state: BlockOperator, phi: float) -> BlockOperator:
    """
    E(rho (+) 0) = (cos^2 phi rho) (+) (sin^2 phi rho).

    Raises:
        QuasiCopyPreconditionError: If the input is not of the form rho (+) 0
    """
    present = [
        name for name in ("diag_bot", "off_top", "off_bot")
        if state.raw_block(name) is not None
    ]
    if present:
        raise QuasiCopyPreconditionError(
            "Quasi-copy expects a state of the form rho (+) 0",
            details={"nonzero_blocks": present},
        )
    rho = state.diag_top
    return BlockOperator(
        state.dim,
        diag_top=math.cos(phi) ** 2 * rho,
        diag_bot=math.sin(phi) ** 2 * rho,
    )


def outer_measurement(config: ProtocolConfig, strict: bool = True) -> QuantumInstrument:
    """
    {(1/sqrt n) 1 (+) M_nu}, labelled "1".."n".

    Raises:
        IncompleteMeasurementError: If strict and the inner family is not complete
    """
    if strict:
        config.require_complete()
    eye = np.eye(config.d, dtype=np.complex128) / math.sqrt(config.n)
    return QuantumInstrument(
        InstrumentKind.MEASUREMENT,
        [(str(nu), direct_sum(eye, m)) for nu, m in enumerate(config.inner_measurement, start=1)],
    )


def recovery_instrument(d: int) -> QuantumInstrument:
    """{1 (+) 0, 0 (+) 1}; takes no outcome of the outer measurement."""
    eye = np.eye(d, dtype=np.complex128)
    zero = np.zeros((d, d), dtype=np.complex128)
    return QuantumInstrument(
        InstrumentKind.MEASUREMENT,
        [(MU0, direct_sum(eye, zero)), (MU1, direct_sum(zero, eye))],
    )


def branch(op: BlockOperator, state: BlockOperator) -> Tuple[BlockOperator, float]:
    """Unnormalized post-outcome state op state op^dag and its probability."""
    unnormalized = op @ state @ op.adjoint()
    return unnormalized, float(np.real(block_trace(unnormalized)))


def normalize(state: BlockOperator, prob: float) -> BlockOperator:
    return scale(state, 1.0 / prob)


def reduce_ancilla(state: BlockOperator) -> ComplexMatrix:
    """Trace out the ancilla: the sum of the two diagonal blocks."""
    return state.diag_top + state.diag_bot
