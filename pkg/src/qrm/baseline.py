"""
Quantum reversible measurement (QRM) baseline.

Outcome nu of a measurement {m_nu} is reversed by R_nu = s_min(m_nu) m_nu^-1,
the largest multiple of the inverse with R^dag R <= 1. The best total reversal
probability is sum_nu min-eig(m_nu^dag m_nu), independent of the input state.
"""
import math
from dataclasses import dataclass
from typing import Any, List, Optional, Sequence

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field
from scipy import linalg as sla

from src.config import config as app_config
from src.errors import (
    DimensionMismatchError,
    IncompleteMeasurementError,
    SingularOperatorError,
    TradeoffMismatchError,
    ZeroProbabilityError,
)
from src.matrices import ComplexMatrix, hermitize, min_eigenvalue, psd_sqrt
from src.protocol.models import ProtocolConfig, TrialRecord
from src.protocol.steps import MU0, MU1
from src.quantum import (
    DensityMatrix,
    InstrumentKind,
    QuantumInstrument,
    RngStream,
    apply_outcome,
    fidelity,
    outcome_distribution,
    sample_index,
)


class QrmInstrument:
    """Measurement {m_nu} acting directly on the system space."""

    def __init__(self, operators: Sequence[ComplexMatrix]):
        """
        Raises:
            DimensionMismatchError: If operators are not square or differ in shape
        """
        ops = [np.array(m, dtype=np.complex128) for m in operators]
        if not ops:
            raise DimensionMismatchError("QRM instrument needs at least one operator")
        shape = ops[0].shape
        for idx, m in enumerate(ops, start=1):
            if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape != shape:
                raise DimensionMismatchError(
                    f"m_{idx} has shape {m.shape}, expected square {shape}"
                )
            m.setflags(write=False)
        self.operators: List[ComplexMatrix] = ops

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def __len__(self) -> int:
        return len(self.operators)

    def completeness_residual(self) -> float:
        total = sum(m.conj().T @ m for m in self.operators)
        return float(np.linalg.norm(total - np.eye(self.dim), ord="fro"))

    def require_complete(self) -> None:
        residual = self.completeness_residual()
        if residual > app_config.tolerances.analytic:
            raise IncompleteMeasurementError(
                f"QRM instrument is not complete (residual {residual:.3e})",
                details={"residual": residual},
            )

    def effect_min_eigenvalues(self) -> List[float]:
        """min-eig(m_nu^dag m_nu) per outcome, clipped at 0."""
        return [max(min_eigenvalue(m.conj().T @ m), 0.0) for m in self.operators]

    def to_instrument(self) -> QuantumInstrument:
        return QuantumInstrument(
            InstrumentKind.MEASUREMENT,
            [(str(nu), m) for nu, m in enumerate(self.operators, start=1)],
        )

    def __repr__(self) -> str:
        return f"<QrmInstrument dim={self.dim} outcomes={len(self)}>"


def qrm_reversal_operator(m: ComplexMatrix) -> ComplexMatrix:
    """
    R = s_min(m) m^-1.

    Raises:
        SingularOperatorError: If the smallest singular value is below the
            singularity threshold (the outcome is irreversible)
    """
    m = np.asarray(m, dtype=np.complex128)
    s_min = float(sla.svdvals(m).min())
    if s_min <= app_config.tolerances.singular:
        raise SingularOperatorError(
            f"Measurement operator is singular (smallest singular value {s_min:.3e})",
            details={"min_singular_value": s_min},
        )
    return s_min * sla.inv(m)


def qrm_max_reversal_probability(inst: QrmInstrument) -> float:
    """
    sum_nu min-eig(m_nu^dag m_nu).

    Raises:
        IncompleteMeasurementError: If the instrument is incomplete
    """
    inst.require_complete()
    return float(sum(inst.effect_min_eigenvalues()))


def matched_qrm_instrument(config: ProtocolConfig) -> QrmInstrument:
    """
    QRM measurement with the protocol's outcome statistics on every state:
    m_nu = sqrt(cos^2 phi / n 1 + sin^2 phi M_nu^dag M_nu) (Hermitian PSD root).
    """
    eye = np.eye(config.d, dtype=np.complex128)
    ops = [
        psd_sqrt(config.cos2 / config.n * eye + config.sin2 * (m.conj().T @ m))
        for m in config.inner_measurement
    ]
    return QrmInstrument(ops)


def redress(inst: QrmInstrument, unitaries: Sequence[ComplexMatrix]) -> QrmInstrument:
    """Left-multiply each m_nu by a unitary; m^dag m and all statistics are unchanged."""
    if len(unitaries) != len(inst):
        raise DimensionMismatchError(
            f"Expected {len(inst)} unitaries, got {len(unitaries)}"
        )
    return QrmInstrument([u @ m for u, m in zip(unitaries, inst.operators)])


class TradeoffReport(BaseModel):
    """QRM versus direct-sum recovery at one phi."""

    phi: float
    p_qrm: float = Field(..., description="Best QRM reversal probability")
    p_ours: float = Field(..., description="cos^2 phi")
    delta: float = Field(..., description="p_qrm - p_ours")
    min_eigs: List[float] = Field(..., description="min-eig(M_nu^dag M_nu) of the inner family")
    condition_holds: bool = Field(..., description="Every inner effect has a zero eigenvalue")


def tradeoff_check(config: ProtocolConfig, strict: bool = True) -> TradeoffReport:
    """
    Compare the matched QRM reversal probability with cos^2 phi.

    When every M_nu^dag M_nu has a zero eigenvalue the two must agree. Otherwise
    p_qrm = cos^2 phi + sin^2 phi sum_nu min-eig(M_nu^dag M_nu).

    Raises:
        TradeoffMismatchError: If strict, the condition holds, and they differ
    """
    min_eigs = [max(min_eigenvalue(m.conj().T @ m), 0.0) for m in config.inner_measurement]
    condition_holds = all(v <= app_config.tolerances.singular for v in min_eigs)

    p_qrm = qrm_max_reversal_probability(matched_qrm_instrument(config))
    p_ours = config.cos2
    delta = p_qrm - p_ours

    if condition_holds and abs(delta) > app_config.tolerances.analytic:
        logger.error(f"Trade-off equality violated at phi={config.phi:.6f}: delta={delta:.3e}")
        if strict:
            raise TradeoffMismatchError(
                f"p_qrm={p_qrm:.12f} differs from cos^2(phi)={p_ours:.12f}",
                details={"phi": config.phi, "delta": delta},
            )

    return TradeoffReport(
        phi=config.phi,
        p_qrm=p_qrm,
        p_ours=p_ours,
        delta=delta,
        min_eigs=min_eigs,
        condition_holds=condition_holds,
    )


def qrm_recovery_instrument(m: ComplexMatrix) -> QuantumInstrument:
    """{R_nu, sqrt(1 - R_nu^dag R_nu)} for one outcome operator."""
    r = qrm_reversal_operator(m)
    complement = psd_sqrt(np.eye(r.shape[0]) - hermitize(r.conj().T @ r))
    return QuantumInstrument(InstrumentKind.MEASUREMENT, [(MU0, r), (MU1, complement)])


@dataclass(frozen=True)
class _QrmBranch:
    nu: int
    p_nu: float
    recovery: Optional[QuantumInstrument]
    p_mu: Optional[np.ndarray]
    recovered: Optional[DensityMatrix]
    failure_state: Optional[DensityMatrix]


class QrmEngine:
    """Precomputed QRM measure-then-reverse pipeline for one state."""

    engine_name = "qrm"

    def __init__(self, inst: QrmInstrument, rho: Any):
        """
        Raises:
            IncompleteMeasurementError: If the instrument is incomplete
        """
        inst.require_complete()
        self.inst = inst
        self.rho = rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho)
        self.measurement = inst.to_instrument()
        self.p_nu_table = outcome_distribution(self.measurement, self.rho).probs
        self.branches = [self._build_branch(i) for i in range(len(inst))]

    def _build_branch(self, idx: int) -> _QrmBranch:
        nu = idx + 1
        p_nu = float(self.p_nu_table[idx])
        if p_nu <= app_config.tolerances.zero_probability:
            return _QrmBranch(nu, p_nu, None, None, None, None)

        post, _ = apply_outcome(self.measurement, self.rho, idx)
        try:
            recovery = qrm_recovery_instrument(self.inst.operators[idx])
        except SingularOperatorError:
            logger.debug(f"QRM outcome nu={nu} is irreversible")
            return _QrmBranch(nu, p_nu, None, None, None, None)

        p_mu = outcome_distribution(recovery, post).probs
        states = []
        for col in range(2):
            if p_mu[col] > app_config.tolerances.zero_probability:
                states.append(apply_outcome(recovery, post, col)[0])
            else:
                states.append(None)
        return _QrmBranch(nu, p_nu, recovery, p_mu, states[0], states[1])

    def run_trial(self, stream: RngStream, trial: int = 0) -> TrialRecord:
        """
        Raises:
            SingularOperatorError: If the sampled outcome cannot be reversed
        """
        u_outer, u_recovery = stream.uniforms(2)
        chosen = self.branches[sample_index(self.p_nu_table, u_outer)]
        if chosen.recovery is None:
            raise SingularOperatorError(
                f"Sampled outcome nu={chosen.nu} has a singular measurement operator",
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
            fidelity_to_rho0=fidelity(state, self.rho),
        )


def run_qrm_protocol(inst: QrmInstrument, rho: Any, rng_stream: RngStream) -> TrialRecord:
    """Measure with inst, then attempt the outcome-specific reversal."""
    return QrmEngine(inst, rho).run_trial(rng_stream, rng_stream.trial)


def qrm_success_probability(inst: QrmInstrument, rho: Any) -> float:
    """Exact success probability of the QRM pipeline on rho (sums reversible branches)."""
    engine = QrmEngine(inst, rho)
    return float(sum(
        b.p_nu * b.p_mu[0] for b in engine.branches if b.p_mu is not None
    ))


def bb84_instrument(theta: float) -> QrmInstrument:
    """{diag(cos t, sin t), diag(sin t, cos t)}; reversal probability 2 sin^2 t for t <= pi/4."""
    c, s = math.cos(theta), math.sin(theta)
    return QrmInstrument([np.diag([c, s]), np.diag([s, c])])
