"""
Dense tensor-product implementation of the recovery protocol.

The orthogonal complement is realized with an ancilla qubit: H_d is
system (x) |0> and H_d^perp is system (x) |1>. Matrices are 2d x 2d in
system (x) ancilla ordering (flattened index = system * 2 + ancilla).

This module uses only dense matrices and the general instrument machinery;
it never touches the block algebra, so agreement with the block engine is
an independent check of both.
"""
import math
from dataclasses import dataclass
from typing import Any, List, Optional

import numpy as np
from loguru import logger

from src.config import config as app_config
from src.errors import DimensionMismatchError, ZeroProbabilityError
from src.matrices import ComplexMatrix
from src.protocol.models import ProtocolConfig, TrialRecord
from src.quantum import (
    DensityMatrix,
    InstrumentKind,
    QuantumInstrument,
    RngStream,
    apply_channel,
    apply_outcome,
    fidelity,
    outcome_distribution,
    partial_trace_ancilla,
    sample_index,
)

MU0 = "mu0"
MU1 = "mu1"


def ket0() -> np.ndarray:
    return np.array([[1.0], [0.0]], dtype=np.complex128)


def ket1() -> np.ndarray:
    return np.array([[0.0], [1.0]], dtype=np.complex128)


def ketbra(a: int, b: int) -> ComplexMatrix:
    """|a><b| on the ancilla qubit."""
    kets = (ket0(), ket1())
    return kets[a] @ kets[b].conj().T


def sigma_z() -> ComplexMatrix:
    return ketbra(0, 0) - ketbra(1, 1)


def _eye(d: int) -> ComplexMatrix:
    return np.eye(d, dtype=np.complex128)


def _block_positions(d: int) -> np.ndarray:
    """Tensor index t -> block index (ancilla * d + system)."""
    t = np.arange(2 * d)
    return (t % 2) * d + t // 2


def _check_square(mat: ComplexMatrix, d: int) -> ComplexMatrix:
    mat = np.asarray(mat, dtype=np.complex128)
    if mat.shape != (2 * d, 2 * d):
        raise DimensionMismatchError(f"Expected a {2 * d} x {2 * d} matrix, got {mat.shape}")
    return mat


def block_to_tensor_order(mat: ComplexMatrix, d: int) -> ComplexMatrix:
    """Reorder a matrix from block layout [[H_d, .], [., H_d^perp]] to system (x) ancilla."""
    perm = _block_positions(d)
    return _check_square(mat, d)[np.ix_(perm, perm)]


def tensor_to_block_order(mat: ComplexMatrix, d: int) -> ComplexMatrix:
    """Inverse of block_to_tensor_order."""
    inverse = np.argsort(_block_positions(d))
    return _check_square(mat, d)[np.ix_(inverse, inverse)]


def embedding_isometry(d: int) -> ComplexMatrix:
    """V = 1 (x) |0>, a 2d x d isometry."""
    return np.kron(_eye(d), ket0())


def dense_embed(rho: Any) -> DensityMatrix:
    """rho (x) |0><0|."""
    rho = rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho)
    v = embedding_isometry(rho.dim)
    return DensityMatrix(v @ rho.mat @ v.conj().T)


def dense_quasi_copy(phi: float, d: int) -> QuantumInstrument:
    """
    K0 = cos phi 1 (x) |0><0| + sin phi 1 (x) |0><1|
    K1 = -cos phi 1 (x) |1><1| + sin phi 1 (x) |1><0|
    """
    c, s = math.cos(phi), math.sin(phi)
    eye = _eye(d)
    k0 = c * np.kron(eye, ketbra(0, 0)) + s * np.kron(eye, ketbra(0, 1))
    k1 = -c * np.kron(eye, ketbra(1, 1)) + s * np.kron(eye, ketbra(1, 0))
    return QuantumInstrument(InstrumentKind.CHANNEL, [("K0", k0), ("K1", k1)])


def dense_outer_measurement(config: ProtocolConfig, strict: bool = True) -> QuantumInstrument:
    """Conditional measurement (1/sqrt n) 1 (x) |0><0| + M_nu (x) |1><1|."""
    if strict:
        config.require_complete()
    eye = _eye(config.d)
    p0, p1 = ketbra(0, 0), ketbra(1, 1)
    return QuantumInstrument(
        InstrumentKind.MEASUREMENT,
        [
            (str(nu), np.kron(eye, p0) / math.sqrt(config.n) + np.kron(m, p1))
            for nu, m in enumerate(config.inner_measurement, start=1)
        ],
    )


def dense_recovery(d: int) -> QuantumInstrument:
    """Projective sigma_z measurement on the ancilla: 1 (x) (1 +- sigma_z)/2."""
    eye2 = _eye(2)
    z = sigma_z()
    return QuantumInstrument(
        InstrumentKind.MEASUREMENT,
        [
            (MU0, np.kron(_eye(d), (eye2 + z) / 2)),
            (MU1, np.kron(_eye(d), (eye2 - z) / 2)),
        ],
    )


@dataclass(frozen=True)
class DenseBranch:
    nu: int
    p_nu: float
    post_state: Optional[DensityMatrix]
    p_mu: np.ndarray
    recovered_full: Optional[DensityMatrix]
    recovered: Optional[DensityMatrix]
    failure_state: Optional[DensityMatrix]


class DensePipeline:
    """Precomputed 2d-dimensional pipeline for one ProtocolConfig."""

    engine_name = "dense"

    def __init__(self, config: ProtocolConfig):
        self.config = config
        self.dim_total = 2 * config.d
        self.isometry = embedding_isometry(config.d)
        self.quasi_copy = dense_quasi_copy(config.phi, config.d)
        self.outer = dense_outer_measurement(config)
        self.recovery = dense_recovery(config.d)

        self.initial = dense_embed(config.rho0)
        self.copied = apply_channel(self.quasi_copy, self.initial)
        self.p_nu_table = outcome_distribution(self.outer, self.copied).probs
        self.branches: List[DenseBranch] = [
            self._build_branch(idx) for idx in range(config.n)
        ]
        logger.debug(f"Dense engine ready: dim_total={self.dim_total} n={config.n}")

    def _build_branch(self, idx: int) -> DenseBranch:
        zero = app_config.tolerances.zero_probability
        nu = idx + 1
        p_nu = float(self.p_nu_table[idx])
        if p_nu <= zero:
            return DenseBranch(nu, 0.0, None, np.zeros(2), None, None, None)

        post, _ = apply_outcome(self.outer, self.copied, idx)
        p_mu = outcome_distribution(self.recovery, post).probs
        full = [
            apply_outcome(self.recovery, post, col)[0] if p_mu[col] > zero else None
            for col in range(2)
        ]
        reduced = [
            None if state is None
            else DensityMatrix.from_unnormalized(partial_trace_ancilla(state.mat, self.config.d))
            for state in full
        ]
        return DenseBranch(nu, p_nu, post, np.array(p_mu), full[0], reduced[0], reduced[1])

    def joint_distribution(self) -> np.ndarray:
        """P[nu, mu] table of shape (n, 2), same layout as the block engine."""
        return self.p_nu_table[:, None] * np.array([b.p_mu for b in self.branches])

    def run_trial(self, stream: RngStream, trial: int = 0) -> TrialRecord:
        """Same draw order as the block engine: nu from the first uniform, mu from the second."""
        u_outer, u_recovery = stream.uniforms(2)
        chosen = self.branches[sample_index(self.p_nu_table, u_outer)]
        if chosen.post_state is None:
            raise ZeroProbabilityError(
                f"Sampled outcome nu={chosen.nu} with zero probability",
                details={"nu": chosen.nu},
            )

        mu = MU0 if sample_index(chosen.p_mu, u_recovery) == 0 else MU1
        state = chosen.recovered if mu == MU0 else chosen.failure_state
        if state is None:
            raise ZeroProbabilityError(
                f"Sampled outcome {mu} with zero probability after nu={chosen.nu}",
                details={"nu": chosen.nu, "mu": mu},
            )
        return TrialRecord(
            trial=trial,
            engine=self.engine_name,
            nu=chosen.nu,
            mu=mu,
            p_nu=chosen.p_nu,
            p_mu_given_nu=chosen.p_mu[0],
            recovered=state if mu == MU0 else None,
            failure_state=state if mu == MU1 else None,
            fidelity_to_rho0=fidelity(state, self.config.rho0),
        )


def run_dense_pipeline(
    config: ProtocolConfig, rng_stream: RngStream, trial: Optional[int] = None
) -> TrialRecord:
    """Run one end-to-end trial in the tensor-product picture."""
    trial = rng_stream.trial if trial is None else trial
    return DensePipeline(config).run_trial(rng_stream, trial)
