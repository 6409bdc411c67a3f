"""
Quantum reversible measurement baseline and the recovery trade-off.
"""

from src.qrm.baseline import (
    QrmEngine,
    QrmInstrument,
    TradeoffReport,
    bb84_instrument,
    matched_qrm_instrument,
    qrm_max_reversal_probability,
    qrm_recovery_instrument,
    qrm_reversal_operator,
    qrm_success_probability,
    redress,
    run_qrm_protocol,
    tradeoff_check,
)

__all__ = [
    "QrmEngine",
    "QrmInstrument",
    "TradeoffReport",
    "bb84_instrument",
    "matched_qrm_instrument",
    "qrm_max_reversal_probability",
    "qrm_recovery_instrument",
    "qrm_reversal_operator",
    "qrm_success_probability",
    "redress",
    "run_qrm_protocol",
    "tradeoff_check",
]
