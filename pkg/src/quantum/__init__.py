"""
General quantum-state machinery.

Components:
- DensityMatrix: validated density operators
- QuantumInstrument: labeled Kraus families (channels and measurements)
- validate_instrument / outcome_distribution / apply_outcome / apply_channel
- sample_outcome: inverse-CDF sampling over counter-based RngStreams
- fidelity / trace_distance / partial_trace_ancilla
- random_families: Haar, Wishart and Ginibre constructions
"""

from src.quantum.instruments import (
    InstrumentKind,
    InstrumentReport,
    LabeledOperator,
    OutcomeDistribution,
    QuantumInstrument,
    apply_channel,
    apply_outcome,
    as_matrix,
    outcome_distribution,
    sample_index,
    sample_outcome,
    validate_instrument,
)
from src.quantum.metrics import fidelity, partial_trace_ancilla, trace_distance
from src.quantum.rng import RngStream, family_generator
from src.quantum.states import DensityMatrix

__all__ = [
    "DensityMatrix",
    "InstrumentKind",
    "InstrumentReport",
    "LabeledOperator",
    "OutcomeDistribution",
    "QuantumInstrument",
    "RngStream",
    "apply_channel",
    "apply_outcome",
    "as_matrix",
    "family_generator",
    "fidelity",
    "outcome_distribution",
    "partial_trace_ancilla",
    "sample_index",
    "sample_outcome",
    "trace_distance",
    "validate_instrument",
]
