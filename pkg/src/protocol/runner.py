"""
Block-engine execution of the full protocol.

Steps: embed -> quasi-copy -> outer measurement (sample nu) ->
recovery measurement (sample mu). Every branch is computed once per config;
trials only draw two uniforms and look up the precomputed branch.
"""
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from loguru import logger

from src.config import config as app_config
from src.errors import ZeroProbabilityError
from src.linalg import BlockOperator
from src.protocol.models import ProtocolConfig, TrialRecord
from src.protocol.steps import (
    MU0,
    MU1,
    apply_quasi_copy,
    branch,
    embed_with_ancilla,
    normalize,
    outer_measurement,
    recovery_instrument,
    reduce_ancilla,
)
from src.quantum import DensityMatrix, RngStream, fidelity, sample_index


@dataclass(frozen=True)
class Branch:
    """Everything that follows a given outer outcome nu."""

    nu: int
    p_nu: float
    post_state: Optional[BlockOperator]
    p_mu: np.ndarray  # [P[mu0|nu], P[mu1|nu]]
    recovered_block: Optional[BlockOperator]
    recovered: Optional[DensityMatrix]
    failure_state: Optional[DensityMatrix]


class ProtocolEngine:
    """Precomputed block pipeline for one ProtocolConfig."""

    engine_name = "block"

    def __init__(self, config: ProtocolConfig):
        """
        Build every branch of the pipeline.

        Raises:
            IncompleteMeasurementError: If the inner family is not complete
        """
        self.config = config
        self.initial = embed_with_ancilla(config.rho0)
        self.copied = apply_quasi_copy(self.initial, config.phi)
        self.outer = outer_measurement(config)
        self.recovery = recovery_instrument(config.d)
        self.branches: List[Branch] = [
            self._build_branch(nu, op.operator)
            for nu, op in enumerate(self.outer.operators, start=1)
        ]
        self.p_nu_table = np.array([b.p_nu for b in self.branches])
        logger.debug(
            f"Block engine ready: d={config.d} n={config.n} phi={config.phi:.6f} "
            f"P[nu]={np.round(self.p_nu_table, 6).tolist()}"
        )

    def _build_branch(self, nu: int, op: BlockOperator) -> Branch:
        zero = app_config.tolerances.zero_probability
        unnormalized, p_nu = branch(op, self.copied)
        if p_nu <= zero:
            return Branch(nu, 0.0, None, np.array([0.0, 0.0]), None, None, None)

        post = normalize(unnormalized, p_nu)
        p_mu = np.zeros(2)
        states = {}
        for col, rec in enumerate(self.recovery.operators):
            out, p = branch(rec.operator, post)
            p_mu[col] = p
            if p > zero:
                states[rec.label] = normalize(out, p)

        recovered_block = states.get(MU0)
        recovered = None
        if recovered_block is not None:
            recovered = DensityMatrix.from_unnormalized(reduce_ancilla(recovered_block))
        failure = None
        if MU1 in states:
            failure = DensityMatrix.from_unnormalized(reduce_ancilla(states[MU1]))
        return Branch(nu, p_nu, post, p_mu, recovered_block, recovered, failure)

    def run_trial(self, stream: RngStream, trial: int = 0) -> TrialRecord:
        """
        One trial driven by a single stream: the first uniform selects nu, the
        second selects mu.
        """
        u_outer, u_recovery = stream.uniforms(2)
        idx = sample_index(self.p_nu_table, u_outer)
        chosen = self.branches[idx]
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
            recovered=chosen.recovered if mu == MU0 else None,
            failure_state=chosen.failure_state if mu == MU1 else None,
            fidelity_to_rho0=fidelity(state, self.config.rho0),
        )


def run_protocol(
    config: ProtocolConfig, rng_stream: RngStream, trial: Optional[int] = None
) -> TrialRecord:
    """Run one end-to-end trial of the block protocol."""
    trial = rng_stream.trial if trial is None else trial
    return ProtocolEngine(config).run_trial(rng_stream, trial)
