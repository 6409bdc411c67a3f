"""
Dense oracle tests: tensor-product pipeline against the block engine.
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

import ast
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.cli.montecarlo import branch_state_error, run_trials, trajectories_agree
from src.linalg import to_dense
from src.oracle import (
    DensePipeline,
    block_to_tensor_order,
    dense_embed,
    dense_outer_measurement,
    dense_quasi_copy,
    dense_recovery,
    embedding_isometry,
    ketbra,
    run_dense_pipeline,
    sigma_z,
    tensor_to_block_order,
)
from src.protocol import (
    ProtocolConfig,
    ProtocolEngine,
    apply_quasi_copy,
    embed_with_ancilla,
    joint_distribution,
    outer_measurement,
    quasi_copy_channel,
    recovery_instrument,
)
from src.quantum import RngStream, apply_channel, partial_trace_ancilla, trace_distance, validate_instrument
from src.quantum.random_families import wishart_mixed_state


seeds = st.integers(min_value=0, max_value=2**32 - 1)


def _ancilla_state(mat, d):
    """Trace out the system, leaving the 2 x 2 ancilla state."""
    return np.einsum("iaib->ab", mat.reshape(d, 2, d, 2))


def _configs():
    rng = np.random.default_rng(0)
    for idx in range(8):
        d = int(rng.choice([2, 3, 4, 8]))
        n = int(rng.integers(1, 5))
        phi = float(rng.uniform(0, math.pi / 2))
        yield ProtocolConfig.random(d=d, n=n, phi=phi, seed=idx)


def _state_configs():
    rng = np.random.default_rng(1)
    configs = [
        ProtocolConfig.random(d=1, n=1, phi=0.0, seed=20),
        ProtocolConfig.random(d=1, n=3, phi=0.7, seed=21),
        ProtocolConfig.random(d=3, n=2, phi=0.0, seed=22),
        ProtocolConfig.random(d=2, n=4, phi=math.pi / 2, seed=23),
        ProtocolConfig.random(d=4, n=3, phi=math.pi / 2, seed=24, measurement="projective"),
        ProtocolConfig.random(d=8, n=2, phi=1.0, seed=25, state="random_pure"),
    ]
    for idx in range(14):
        configs.append(ProtocolConfig.random(
            d=int(rng.choice([1, 2, 3, 4, 8])),
            n=int(rng.integers(1, 5)),
            phi=float(rng.uniform(0, math.pi / 2)),
            seed=30 + idx,
        ))
    return configs


# ---------------------------------------------------------------------------
# Layout and ancilla helpers
# ---------------------------------------------------------------------------

def test_ancilla_helpers():
    np.testing.assert_array_equal(sigma_z(), np.diag([1, -1]))
    np.testing.assert_array_equal(ketbra(0, 1), [[0, 1], [0, 0]])
    v = embedding_isometry(3)
    np.testing.assert_allclose(v.conj().T @ v, np.eye(3))


@pytest.mark.parametrize("d", [1, 2, 5])
def test_layout_permutation_round_trip(d):
    rng = np.random.default_rng(d)
    m = rng.standard_normal((2 * d, 2 * d)) + 1j * rng.standard_normal((2 * d, 2 * d))
    np.testing.assert_array_equal(tensor_to_block_order(block_to_tensor_order(m, d), d), m)


@settings(max_examples=30)
@given(st.integers(min_value=1, max_value=8), seeds)
def test_embedding_matches_block_layout(d, seed):
    rho = wishart_mixed_state(d, np.random.default_rng(seed))
    dense = dense_embed(rho)
    np.testing.assert_allclose(dense.mat, np.kron(rho.mat, ketbra(0, 0)), atol=1e-15)
    np.testing.assert_allclose(dense.mat, block_to_tensor_order(to_dense(embed_with_ancilla(rho)), d), atol=1e-15)


# ---------------------------------------------------------------------------
# Instruments
# ---------------------------------------------------------------------------

def test_quasi_copy_hand_assembled_forms():
    phi, d = 1.234, 3
    c, s = math.cos(phi), math.sin(phi)
    eye, zero = np.eye(d), np.zeros((d, d))
    k0, k1 = dense_quasi_copy(phi, d).dense_operators
    np.testing.assert_allclose(tensor_to_block_order(k0, d), np.block([[c * eye, s * eye], [zero, zero]]), atol=1e-15)
    np.testing.assert_allclose(tensor_to_block_order(k1, d), np.block([[zero, zero], [s * eye, -c * eye]]), atol=1e-15)


@pytest.mark.parametrize("cfg", list(_configs()))
def test_instruments_match_block_forms(cfg):
    d = cfg.d
    pairs = [
        (dense_quasi_copy(cfg.phi, d), quasi_copy_channel(cfg.phi, d)),
        (dense_outer_measurement(cfg), outer_measurement(cfg)),
        (dense_recovery(d), recovery_instrument(d)),
    ]
    for dense, block in pairs:
        assert dense.labels == block.labels
        assert validate_instrument(dense, tol=1e-12).passed
        for dm, bm in zip(dense.dense_operators, block.dense_operators):
            np.testing.assert_allclose(dm, block_to_tensor_order(bm, d), atol=1e-15)


@settings(max_examples=30)
@given(st.integers(min_value=1, max_value=6), st.floats(min_value=0.0, max_value=math.pi / 2), seeds)
def test_dense_quasi_copy_matches_block_channel(d, phi, seed):
    state = embed_with_ancilla(wishart_mixed_state(d, np.random.default_rng(seed)))
    dense = apply_channel(dense_quasi_copy(phi, d), dense_embed(state.diag_top))
    block = apply_quasi_copy(state, phi)
    np.testing.assert_allclose(dense.mat, block_to_tensor_order(to_dense(block), d), atol=1e-12)

@pytest.mark.parametrize("phi", [0.0, 0.4, math.pi / 4, 1.3, math.pi / 2])
def test_quasi_copy_moves_weight_to_ancilla(phi):
    d = 3
    rho = wishart_mixed_state(d, np.random.default_rng(2))
    copied = apply_channel(dense_quasi_copy(phi, d), dense_embed(rho))
    np.testing.assert_allclose(
        _ancilla_state(copied.mat, d), np.diag([math.cos(phi) ** 2, math.sin(phi) ** 2]), atol=1e-12
    )
    np.testing.assert_allclose(partial_trace_ancilla(copied.mat, d), rho.mat, atol=1e-12)


# ---------------------------------------------------------------------------
# Pipelines
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("cfg", list(_configs()))
def test_joint_tables_agree(cfg):
    np.testing.assert_allclose(DensePipeline(cfg).joint_distribution(), joint_distribution(cfg), atol=1e-12)


@pytest.mark.parametrize("cfg", _state_configs())
def test_recovered_states_agree(cfg):
    block, dense = ProtocolEngine(cfg), DensePipeline(cfg)
    assert branch_state_error(block, dense) <= 1e-12
    for b, o in zip(block.branches, dense.branches):
        assert b.p_nu == pytest.approx(o.p_nu, abs=1e-12)
        np.testing.assert_allclose(b.p_mu, o.p_mu, atol=1e-12)
        if o.recovered is None:
            continue
        assert trace_distance(o.recovered, cfg.rho0) <= 1e-10
        np.testing.assert_allclose(
            o.recovered_full.mat, block_to_tensor_order(to_dense(b.recovered_block), cfg.d), atol=1e-12
        )


def test_right_angle_has_no_recovered_state():
    cfg = ProtocolConfig.random(d=2, n=2, phi=math.pi / 2, seed=3)
    block, dense = ProtocolEngine(cfg), DensePipeline(cfg)
    assert all(b.recovered is None and o.recovered is None for b, o in zip(block.branches, dense.branches))
    assert all(o.failure_state is not None for o in dense.branches if o.p_nu > 0)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_seed_matched_trajectories_agree(seed):
    cfg = ProtocolConfig.random(d=3, n=3, phi=0.9, seed=seed)
    block = run_trials(ProtocolEngine(cfg), 2000, seed)
    dense = run_trials(DensePipeline(cfg), 2000, seed)
    assert trajectories_agree(block, dense)


def test_trials_do_not_depend_on_thread_count():
    cfg = ProtocolConfig.random(d=2, n=2, phi=0.6, seed=4)
    engine = DensePipeline(cfg)
    single = run_trials(engine, 500, seed=4, threads=1)
    multi = run_trials(engine, 500, seed=4, threads=4)
    assert [r.model_dump_json() for r in single] == [r.model_dump_json() for r in multi]


def test_run_dense_pipeline_record():
    cfg = ProtocolConfig.random(d=2, n=2, phi=0.0, seed=5)
    record = run_dense_pipeline(cfg, RngStream.for_trial(5, 9))
    assert record.engine == "dense"
    assert record.trial == 9
    assert record.success
    assert record.fidelity_to_rho0 == pytest.approx(1.0, abs=1e-10)


def test_oracle_does_not_import_block_algebra():
    import src.oracle.dense_pipeline as module

    tree = ast.parse(Path(module.__file__).read_text(encoding="utf-8"))
    imported = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.ImportFrom) and node.module:
            imported.add(node.module)
        elif isinstance(node, ast.Import):
            imported.update(alias.name for alias in node.names)
    assert not any(name.startswith("src.linalg") for name in imported)
    assert "src.protocol.steps" not in imported
