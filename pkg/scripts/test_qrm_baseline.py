"""
QRM baseline tests: reversal operators, maximal reversal probability,
statistics matching and the recovery trade-off.
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.cli.montecarlo import records_frame, run_trials
from src.errors import IncompleteMeasurementError, SingularOperatorError, TradeoffMismatchError
from src.protocol import ProtocolConfig, outcome_probabilities
from src.qrm import (
    QrmEngine,
    QrmInstrument,
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
from src.quantum import RngStream, outcome_distribution, trace_distance, validate_instrument
from src.quantum.random_families import haar_pure_state, haar_unitary, wishart_mixed_state

seeds = st.integers(min_value=0, max_value=2**32 - 1)


# ---------------------------------------------------------------------------
# Reversal operators
# ---------------------------------------------------------------------------

def test_reversal_operator_diagonal_example():
    r = qrm_reversal_operator(np.diag([0.8, 0.6]))
    np.testing.assert_allclose(r, np.diag([0.75, 1.0]), atol=1e-12)


def test_reversal_operator_of_scaled_identity():
    np.testing.assert_allclose(qrm_reversal_operator(0.3 * np.eye(3)), np.eye(3), atol=1e-12)


@settings(max_examples=50)
@given(st.integers(min_value=1, max_value=6), seeds)
def test_reversal_undoes_measurement_up_to_scalar(d, seed):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    r = qrm_reversal_operator(m)
    s_min = np.linalg.svd(m, compute_uv=False).min()
    np.testing.assert_allclose(r @ m, s_min * np.eye(d), atol=1e-8)
    assert np.linalg.eigvalsh(r.conj().T @ r).max() <= 1.0 + 1e-10


def test_singular_operator_is_irreversible():
    with pytest.raises(SingularOperatorError):
        qrm_reversal_operator(np.diag([1.0, 0.0]))


def test_recovery_instrument_is_complete():
    inst = qrm_recovery_instrument(np.diag([0.8, 0.6]))
    assert inst.labels == ["mu0", "mu1"]
    assert validate_instrument(inst, tol=1e-12).passed


def test_reversal_operators_depend_on_outcome():
    inst = bb84_instrument(0.3)
    r1, r2 = (qrm_reversal_operator(m) for m in inst.operators)
    np.testing.assert_allclose(r1, np.diag([math.tan(0.3), 1.0]), atol=1e-12)
    np.testing.assert_allclose(r2, np.diag([1.0, math.tan(0.3)]), atol=1e-12)
    assert not np.allclose(r1, r2)


# ---------------------------------------------------------------------------
# Maximal reversal probability
# ---------------------------------------------------------------------------

def test_bb84_reversal_probability():
    assert qrm_max_reversal_probability(bb84_instrument(0.3)) == pytest.approx(2 * math.sin(0.3) ** 2, abs=1e-12)
    assert qrm_max_reversal_probability(bb84_instrument(math.pi / 4)) == pytest.approx(1.0, abs=1e-12)


def test_projective_measurement_is_never_reversed():
    inst = QrmInstrument([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    assert qrm_max_reversal_probability(inst) == 0.0


def test_unitary_family_is_always_reversed():
    rng = np.random.default_rng(1)
    inst = QrmInstrument([haar_unitary(3, rng) / math.sqrt(3) for _ in range(3)])
    assert qrm_max_reversal_probability(inst) == pytest.approx(1.0, abs=1e-12)


def test_incomplete_instrument_rejected():
    with pytest.raises(IncompleteMeasurementError):
        qrm_max_reversal_probability(QrmInstrument([np.eye(2) / 2]))


@settings(max_examples=20)
@given(
    st.integers(min_value=1, max_value=5),
    st.integers(min_value=1, max_value=4),
    st.floats(min_value=0.0, max_value=math.pi / 2),
    seeds,
)
def test_success_probability_is_state_independent(d, n, phi, seed):
    rng = np.random.default_rng(seed)
    cfg = ProtocolConfig.random(d=d, n=n, phi=phi, seed=seed)
    inst = matched_qrm_instrument(cfg)
    expected = qrm_max_reversal_probability(inst)
    for rho in (haar_pure_state(d, rng), wishart_mixed_state(d, rng)):
        assert qrm_success_probability(inst, rho) == pytest.approx(expected, abs=1e-10)


def test_recovered_state_equals_input():
    rng = np.random.default_rng(2)
    rho = wishart_mixed_state(2, rng)
    engine = QrmEngine(bb84_instrument(0.4), rho)
    for branch in engine.branches:
        assert trace_distance(branch.recovered, rho) <= 1e-10


# ---------------------------------------------------------------------------
# Matched instruments and the trade-off
# ---------------------------------------------------------------------------

@settings(max_examples=50)
@given(
    st.integers(min_value=1, max_value=6),
    st.integers(min_value=1, max_value=5),
    st.floats(min_value=0.0, max_value=math.pi / 2),
    seeds,
)
def test_matched_instrument_reproduces_statistics(d, n, phi, seed):
    rng = np.random.default_rng(seed)
    cfg = ProtocolConfig.random(d=d, n=n, phi=phi, seed=seed)
    measurement = matched_qrm_instrument(cfg).to_instrument()
    for _ in range(10):
        rho = haar_pure_state(cfg.d, rng)
        np.testing.assert_allclose(
            outcome_distribution(measurement, rho).probs,
            outcome_probabilities(cfg.replace(rho0=rho)),
            atol=1e-12,
        )


def test_redress_keeps_statistics_and_reversal_probability():
    rng = np.random.default_rng(3)
    cfg = ProtocolConfig.random(d=3, n=2, phi=0.5, seed=3)
    inst = matched_qrm_instrument(cfg)
    dressed = redress(inst, [haar_unitary(3, rng) for _ in range(2)])
    rho = wishart_mixed_state(3, rng)
    np.testing.assert_allclose(
        outcome_distribution(dressed.to_instrument(), rho).probs,
        outcome_distribution(inst.to_instrument(), rho).probs,
        atol=1e-12,
    )
    assert qrm_max_reversal_probability(dressed) == pytest.approx(qrm_max_reversal_probability(inst), abs=1e-12)


def test_tradeoff_equality_for_projective_family():
    cfg = ProtocolConfig.random(d=4, n=2, phi=math.pi / 3, seed=4, measurement="projective")
    report = tradeoff_check(cfg)
    assert report.condition_holds
    assert report.p_qrm == pytest.approx(0.25, abs=1e-12)
    assert abs(report.delta) <= 1e-12


@pytest.mark.parametrize("k", range(1, 10))
def test_tradeoff_equality_over_phi_grid(k):
    phi = 0.1 * k * math.pi / 2
    cfg = ProtocolConfig.random(d=4, n=2, phi=phi, seed=5, measurement="projective")
    assert abs(tradeoff_check(cfg).delta) <= 1e-10


def test_tradeoff_gap_for_unitary_family():
    cfg = ProtocolConfig.random(d=2, n=2, phi=math.pi / 4, seed=6, measurement="unitary")
    report = tradeoff_check(cfg, strict=False)
    assert not report.condition_holds
    assert report.delta > 0
    assert report.p_qrm == pytest.approx(1.0, abs=1e-12)


def test_tradeoff_closed_form_for_full_rank_family():
    cfg = ProtocolConfig.random(d=3, n=3, phi=1.1, seed=7)
    report = tradeoff_check(cfg)
    assert report.p_qrm == pytest.approx(cfg.cos2 + cfg.sin2 * sum(report.min_eigs), abs=1e-12)


def test_tradeoff_mismatch_raises_only_when_strict(monkeypatch):
    import src.qrm.baseline as baseline

    cfg = ProtocolConfig.random(d=2, n=2, phi=0.8, seed=8, measurement="projective")
    monkeypatch.setattr(baseline, "qrm_max_reversal_probability", lambda inst: 0.9)
    with pytest.raises(TradeoffMismatchError):
        tradeoff_check(cfg)
    assert tradeoff_check(cfg, strict=False).delta == pytest.approx(0.9 - cfg.cos2)


# ---------------------------------------------------------------------------
# Trials
# ---------------------------------------------------------------------------

def test_singular_outcome_raises_when_drawn():
    inst = QrmInstrument([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    with pytest.raises(SingularOperatorError):
        run_qrm_protocol(inst, np.diag([1.0, 0.0]), RngStream.for_trial(0, 0))


def test_qrm_trial_record():
    record = run_qrm_protocol(bb84_instrument(math.pi / 4), np.eye(2) / 2, RngStream.for_trial(1, 3))
    assert record.engine == "qrm"
    assert record.trial == 3
    assert record.mu == "mu0"
    assert record.fidelity_to_rho0 == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("state_seed", [10, 11])
def test_monte_carlo_success_rate_is_state_independent(state_seed):
    n_trials = 20_000
    inst = bb84_instrument(0.3)
    rho = haar_pure_state(2, np.random.default_rng(state_seed))
    frame = records_frame(run_trials(QrmEngine(inst, rho), n_trials, seed=state_seed))
    p = 2 * math.sin(0.3) ** 2
    assert abs(frame["success"].mean() - p) <= 3 * math.sqrt(p * (1 - p) / n_trials)
