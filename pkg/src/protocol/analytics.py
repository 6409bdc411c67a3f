"""
Closed-form and pipeline-derived protocol quantities.

Closed forms:
    P[nu]        = cos^2 phi / n + sin^2 phi Tr(M_nu rho M_nu^dag)
    P[mu0 | nu]  = cos^2 phi / (n P[nu])
    P[rev]       = cos^2 phi
    P[nu | mu0]  = 1/n
The pipeline-derived versions run the block algebra and serve as cross-checks.
"""
import math
from typing import Any

import numpy as np

from src.config import config as app_config
from src.errors import OutcomeOutOfRangeError, UndefinedPosteriorError, ZeroProbabilityError
from src.linalg import BlockOperator
from src.protocol.models import ProtocolConfig
from src.protocol.steps import (
    apply_quasi_copy,
    branch,
    embed_with_ancilla,
    outer_measurement,
    recovery_instrument,
)
from src.quantum import OutcomeDistribution


def _check_nu(nu: int, config: ProtocolConfig) -> None:
    if not 1 <= int(nu) <= config.n:
        raise OutcomeOutOfRangeError(
            f"Outcome nu={nu} out of range 1..{config.n}", details={"nu": nu, "n": config.n}
        )


def outcome_probability(nu: int, config: ProtocolConfig) -> float:
    """P[nu] in closed form (nu is 1-based)."""
    _check_nu(nu, config)
    m = config.inner_measurement[nu - 1]
    inner = float(np.real(np.trace(m @ config.rho0.mat @ m.conj().T)))
    return config.cos2 / config.n + config.sin2 * inner


def outcome_probabilities(config: ProtocolConfig) -> np.ndarray:
    """P[nu] for nu = 1..n."""
    return np.array([outcome_probability(nu, config) for nu in range(1, config.n + 1)])


def success_given_outcome(nu: int, config: ProtocolConfig) -> float:
    """
    P[mu0 | nu] = cos^2 phi / (n P[nu]).

    Raises:
        ZeroProbabilityError: If P[nu] vanishes
    """
    p_nu = outcome_probability(nu, config)
    if p_nu <= app_config.tolerances.zero_probability:
        raise ZeroProbabilityError(
            f"P[nu={nu}] = {p_nu:.3e}; conditional success probability undefined",
            details={"nu": nu, "p_nu": p_nu},
        )
    return config.cos2 / (config.n * p_nu)


def reversal_probability(phi: float) -> float:
    """P[rev] = cos^2 phi."""
    return math.cos(phi) ** 2


def post_measurement_state(nu: int, config: ProtocolConfig) -> BlockOperator:
    """
    [(cos^2 phi / n) rho (+) sin^2 phi M_nu rho M_nu^dag] / P[nu].

    Raises:
        ZeroProbabilityError: If P[nu] vanishes
    """
    p_nu = outcome_probability(nu, config)
    if p_nu <= app_config.tolerances.zero_probability:
        raise ZeroProbabilityError(
            f"P[nu={nu}] = {p_nu:.3e}; post-measurement state undefined",
            details={"nu": nu, "p_nu": p_nu},
        )
    rho = config.rho0.mat
    m = config.inner_measurement[nu - 1]
    return BlockOperator(
        config.d,
        diag_top=(config.cos2 / config.n) * rho / p_nu,
        diag_bot=config.sin2 * (m @ rho @ m.conj().T) / p_nu,
    )


def joint_distribution(config: ProtocolConfig) -> np.ndarray:
    """
    Table P[nu, mu] of shape (n, 2) computed through the block pipeline.

    Column 0 is mu0, column 1 is mu1. Rows are nu = 1..n.
    """
    copied = apply_quasi_copy(embed_with_ancilla(config.rho0), config.phi)
    recovery = recovery_instrument(config.d)
    table = np.zeros((config.n, 2))
    for row, outer in enumerate(outer_measurement(config).operators):
        unnormalized, _ = branch(outer.operator, copied)
        for col, rec in enumerate(recovery.operators):
            _, p = branch(rec.operator, unnormalized)
            table[row, col] = p
    return table


def pipeline_success_probability(config: ProtocolConfig) -> float:
    """P[mu0] summed over the composed block pipeline."""
    return float(joint_distribution(config)[:, 0].sum())


def posterior_given_success(config: ProtocolConfig) -> OutcomeDistribution:
    """
    Bayes posterior P[nu | mu0] over the outer outcomes.

    Raises:
        UndefinedPosteriorError: If cos phi = 0, so P[mu0] = 0
    """
    if config.cos2 <= app_config.tolerances.zero_probability:
        raise UndefinedPosteriorError(
            f"P[mu0] = cos^2(phi) = {config.cos2:.3e}; posterior is undefined",
            details={"phi": config.phi},
        )
    success = joint_distribution(config)[:, 0]
    labels = [str(nu) for nu in range(1, config.n + 1)]
    return OutcomeDistribution(labels, success / success.sum())


def outcome_dependence(config: ProtocolConfig, rho_a: Any, rho_b: Any) -> float:
    """max_nu |P_a[nu] - P_b[nu]| for two input states under the same protocol."""
    pa = outcome_probabilities(config.replace(rho0=rho_a))
    pb = outcome_probabilities(config.replace(rho0=rho_b))
    return float(np.max(np.abs(pa - pb)))
