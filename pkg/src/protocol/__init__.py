"""
Direct-sum recovery protocol on block operators.

Components:
- models: ProtocolConfig (and its JSON form), TrialRecord
- steps: embedding, quasi-copy channel, outer and recovery measurements
- analytics: closed-form P[nu], P[mu0|nu], P[rev] and the success posterior
- runner: ProtocolEngine and run_protocol
"""

from src.protocol.analytics import (
    joint_distribution,
    outcome_dependence,
    outcome_probabilities,
    outcome_probability,
    pipeline_success_probability,
    post_measurement_state,
    posterior_given_success,
    reversal_probability,
    success_given_outcome,
)
from src.protocol.models import FamilySpec, ProtocolConfig, ProtocolConfigFile, TrialRecord
from src.protocol.runner import ProtocolEngine, run_protocol
from src.protocol.steps import (
    MU0,
    MU1,
    apply_quasi_copy,
    embed_with_ancilla,
    outer_measurement,
    quasi_copy_channel,
    quasi_copy_kraus,
    recovery_instrument,
    reduce_ancilla,
)

__all__ = [
    "MU0",
    "MU1",
    "FamilySpec",
    "ProtocolConfig",
    "ProtocolConfigFile",
    "ProtocolEngine",
    "TrialRecord",
    "apply_quasi_copy",
    "embed_with_ancilla",
    "joint_distribution",
    "outcome_dependence",
    "outcome_probabilities",
    "outcome_probability",
    "outer_measurement",
    "pipeline_success_probability",
    "post_measurement_state",
    "posterior_given_success",
    "quasi_copy_channel",
    "quasi_copy_kraus",
    "recovery_instrument",
    "reduce_ancilla",
    "reversal_probability",
    "run_protocol",
    "success_given_outcome",
]
