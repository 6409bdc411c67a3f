"""
Density matrix, instrument, sampling and metric tests.
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.errors import DimensionMismatchError, InvalidInstrumentError, InvalidStateError, ZeroProbabilityError
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
    sample_outcome,
    trace_distance,
    validate_instrument,
)
from src.quantum.random_families import (
    haar_pure_state,
    haar_unitary,
    projective_family,
    random_povm,
    unitary_family,
    wishart_mixed_state,
)

Z_BASIS = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]


def _measurement(ops):
    return QuantumInstrument(InstrumentKind.MEASUREMENT, ops)


def _channel(ops):
    return QuantumInstrument(InstrumentKind.CHANNEL, ops)


# ---------------------------------------------------------------------------
# DensityMatrix
# ---------------------------------------------------------------------------

def test_density_matrix_rejects_invalid_input():
    with pytest.raises(InvalidStateError):
        DensityMatrix(np.diag([0.5, 0.6]))
    with pytest.raises(InvalidStateError):
        DensityMatrix(np.diag([1.5, -0.5]))
    with pytest.raises(InvalidStateError):
        DensityMatrix(np.array([[0.5, 0.5], [0.0, 0.5]]))
    with pytest.raises(InvalidStateError):
        DensityMatrix(np.ones((2, 3)) / 2)


def test_density_matrix_factories():
    rng = np.random.default_rng(0)
    np.testing.assert_allclose(DensityMatrix.maximally_mixed(4).mat, np.eye(4) / 4)
    pure = DensityMatrix.from_pure(np.array([1.0, 1.0j]))
    np.testing.assert_allclose(pure.mat, np.array([[1, -1j], [1j, 1]]) / 2)
    mixed = wishart_mixed_state(5, rng, rank=2)
    assert np.linalg.matrix_rank(mixed.mat, tol=1e-10) == 2


def test_from_unnormalized_clips_rounding_noise():
    noisy = np.diag([2.0, -1e-12])
    state = DensityMatrix.from_unnormalized(noisy)
    assert np.trace(state.mat).real == pytest.approx(1.0)
    assert np.linalg.eigvalsh(state.mat).min() >= 0.0


# ---------------------------------------------------------------------------
# validate_instrument
# ---------------------------------------------------------------------------

def test_identity_instrument_is_valid():
    report = validate_instrument(_channel([np.eye(3)]))
    assert report.passed
    assert report.residual == 0.0


def test_half_identity_is_incomplete():
    report = validate_instrument(_channel([np.eye(2) / 2]))
    assert not report.passed
    assert report.residual == pytest.approx(np.linalg.norm(np.eye(2) / 4 - np.eye(2)))


def test_dimension_mismatch_between_operators():
    with pytest.raises(DimensionMismatchError):
        _measurement([np.eye(2), np.eye(3)])


@pytest.mark.parametrize("d,n", [(2, 2), (3, 4), (4, 3)])
def test_random_families_are_complete(d, n):
    rng = np.random.default_rng(d * 10 + n)
    for ops in (random_povm(d, n, rng), projective_family(d, n), unitary_family(d, n, rng)):
        assert validate_instrument(_measurement(ops), tol=1e-12).passed


def test_haar_unitary_is_unitary():
    u = haar_unitary(5, np.random.default_rng(3))
    np.testing.assert_allclose(u.conj().T @ u, np.eye(5), atol=1e-12)


# ---------------------------------------------------------------------------
# outcome_distribution / apply_outcome / apply_channel
# ---------------------------------------------------------------------------

def test_outcome_distribution_examples():
    z = _measurement(Z_BASIS)
    np.testing.assert_allclose(outcome_distribution(z, np.diag([1.0, 0.0])).probs, [1.0, 0.0])
    np.testing.assert_allclose(outcome_distribution(z, DensityMatrix.maximally_mixed(2)).probs, [0.5, 0.5])


def test_outcome_distribution_matches_brute_force():
    rng = np.random.default_rng(5)
    ops = random_povm(4, 3, rng)
    rho = wishart_mixed_state(4, rng)
    dist = outcome_distribution(_measurement(ops), rho)
    brute = [sum(
        ops[k][i, a] * rho.mat[a, b] * np.conj(ops[k][i, b])
        for i in range(4) for a in range(4) for b in range(4)
    ).real for k in range(3)]
    np.testing.assert_allclose(dist.probs, brute, atol=1e-12)
    assert dist.probs.sum() == pytest.approx(1.0, abs=1e-10)


def test_outcome_distribution_rejects_incomplete_instrument():
    with pytest.raises(InvalidInstrumentError):
        outcome_distribution(_measurement([np.eye(2) / 2]), DensityMatrix.maximally_mixed(2))


def test_apply_outcome_projective_update():
    state, p = apply_outcome(_measurement(Z_BASIS), np.diag([0.25, 0.75]), 1)
    np.testing.assert_allclose(state.mat, np.diag([0.0, 1.0]), atol=1e-14)
    assert p == pytest.approx(0.75)


def test_apply_outcome_by_label():
    inst = _measurement([("up", Z_BASIS[0]), ("down", Z_BASIS[1])])
    state, p = apply_outcome(inst, np.diag([0.25, 0.75]), "up")
    assert p == pytest.approx(0.25)
    np.testing.assert_allclose(state.mat, np.diag([1.0, 0.0]), atol=1e-14)


def test_apply_outcome_zero_probability():
    with pytest.raises(ZeroProbabilityError):
        apply_outcome(_measurement(Z_BASIS), np.diag([1.0, 0.0]), 1)


def test_unitary_channel_conjugates():
    rng = np.random.default_rng(6)
    u = haar_unitary(3, rng)
    rho = wishart_mixed_state(3, rng)
    state, p = apply_outcome(_channel([u]), rho, 0)
    assert p == pytest.approx(1.0)
    np.testing.assert_allclose(state.mat, u @ rho.mat @ u.conj().T, atol=1e-12)


def test_channel_examples():
    rng = np.random.default_rng(7)
    rho = wishart_mixed_state(2, rng)
    np.testing.assert_allclose(apply_channel(_channel([np.eye(2)]), rho).mat, rho.mat, atol=1e-14)
    dephased = apply_channel(_channel(Z_BASIS), rho)
    np.testing.assert_allclose(dephased.mat, np.diag(np.diag(rho.mat)), atol=1e-14)


@pytest.mark.parametrize("d", [2, 4, 8, 16])
def test_random_channel_preserves_state_invariants(d):
    rng = np.random.default_rng(d)
    out = apply_channel(_channel(random_povm(d, 3, rng)), wishart_mixed_state(d, rng))
    assert np.trace(out.mat).real == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.abs(out.mat - out.mat.conj().T)) <= 1e-10
    assert np.linalg.eigvalsh(out.mat).min() >= -1e-10


def test_instrument_json_round_trip():
    inst = _measurement([("a", Z_BASIS[0]), ("b", 1j * Z_BASIS[1])])
    restored = QuantumInstrument.from_json(inst.to_json())
    assert restored.labels == ["a", "b"]
    np.testing.assert_array_equal(restored.dense_operators[1], inst.dense_operators[1])


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def test_deterministic_distribution_always_first_outcome():
    z = _measurement(Z_BASIS)
    rho = np.diag([1.0, 0.0])
    assert all(sample_outcome(z, rho, RngStream.for_trial(3, t)) == "0" for t in range(200))


def test_sample_outcome_returns_label():
    inst = _measurement([("up", Z_BASIS[0]), ("down", Z_BASIS[1])])
    rho = np.diag([0.0, 1.0])
    labels = {sample_outcome(inst, rho, RngStream.for_trial(4, t)) for t in range(100)}
    assert labels == {"down"}


def test_sample_index_overflow_falls_on_last_nonzero():
    assert sample_index([0.5, 0.5 - 1e-16, 0.0], 0.9999999999999999) == 1


def test_sampling_is_deterministic_per_stream():
    rng = np.random.default_rng(8)
    inst = _measurement(random_povm(3, 4, rng))
    rho = wishart_mixed_state(3, rng)
    first = [sample_outcome(inst, rho, RngStream.for_trial(42, t)) for t in range(50)]
    second = [sample_outcome(inst, rho, RngStream.for_trial(42, t)) for t in range(50)]
    assert first == second


def test_split_streams_are_independent_values():
    root = RngStream(5, 7)
    assert root.split("a") == root.split("a")
    assert root.split("a").uniform() != root.split("b").uniform()
    assert root.uniforms(3).tolist() == root.uniforms(3).tolist()
    assert RngStream.for_trial(5, 1).uniform() != RngStream.for_trial(5, 2).uniform()


def test_fair_coin_frequency_within_three_sigma():
    n = 100_000
    draws = np.array([sample_index([0.5, 0.5], RngStream.for_trial(11, t).uniform()) for t in range(n)])
    sigma = math.sqrt(0.25 / n)
    assert abs(np.mean(draws == 0) - 0.5) <= 3 * sigma


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def test_metrics_on_identical_and_orthogonal_states():
    rho = DensityMatrix(np.diag([1.0, 0.0]))
    sigma = DensityMatrix(np.diag([0.0, 1.0]))
    assert fidelity(rho, rho) == pytest.approx(1.0)
    assert trace_distance(rho, rho) == pytest.approx(0.0)
    assert fidelity(rho, sigma) == pytest.approx(0.0)
    assert trace_distance(rho, sigma) == pytest.approx(1.0)


@settings(max_examples=50)
@given(st.integers(min_value=2, max_value=6), st.integers(min_value=0, max_value=2**32 - 1))
def test_fidelity_trace_distance_inequality(d, seed):
    rng = np.random.default_rng(seed)
    rho, sigma = wishart_mixed_state(d, rng), haar_pure_state(d, rng)
    f, t = fidelity(rho, sigma), trace_distance(rho, sigma)
    assert fidelity(sigma, rho) == pytest.approx(f, abs=1e-10)
    assert trace_distance(sigma, rho) == pytest.approx(t, abs=1e-12)
    assert 1.0 - f <= t + 1e-12


def test_partial_trace_ancilla():
    rng = np.random.default_rng(9)
    rho = wishart_mixed_state(3, rng)
    anc = np.diag([0.3, 0.7])
    np.testing.assert_allclose(partial_trace_ancilla(np.kron(rho.mat, anc), 3), rho.mat, atol=1e-14)
    with pytest.raises(DimensionMismatchError):
        partial_trace_ancilla(np.eye(5), 2)
