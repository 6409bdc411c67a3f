"""
Acceptance campaign for the recovery simulator.

Checks recovery probability, perfect recovery, posterior erasure, the QRM
trade-off, block algebra against dense matrices, instrument validity,
block/dense equivalence and QRM statistics matching, then writes
results/acceptance_summary.json.

Usage:
    python scripts/run_acceptance_sweep.py [--trials 100000] [--seed 0]
"""
import argparse
import json
import math
import sys
import time
from pathlib import Path
from typing import Any, Callable, Dict, List

sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np
from loguru import logger

from src.cli.montecarlo import band_check, branch_state_error, records_frame, run_trials, trajectories_agree
from src.config import RESULTS_DIR
from src.config import config as app_config
from src.linalg import BlockOperator, block_add, block_adjoint, block_mul, block_trace
from src.oracle import DensePipeline
from src.protocol import (
    ProtocolConfig,
    ProtocolEngine,
    joint_distribution,
    outcome_dependence,
    outcome_probabilities,
    outer_measurement,
    pipeline_success_probability,
    posterior_given_success,
    quasi_copy_channel,
    recovery_instrument,
)
from src.qrm import matched_qrm_instrument, tradeoff_check
from src.quantum import DensityMatrix, outcome_distribution, trace_distance, validate_instrument
from src.quantum.random_families import ginibre, haar_pure_state


def setup_logging():
    """Configure logging."""
    logger.remove()
    logger.add(
        sys.stdout,
        format="<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | <level>{message}</level>",
        level="INFO",
    )


def _random_config(rng: np.random.Generator, d_max: int = 16) -> ProtocolConfig:
    d = int(rng.integers(1, d_max + 1))
    n = int(rng.integers(1, 6))
    phi = float(rng.uniform(0.05, math.pi / 2 - 0.05))
    return ProtocolConfig.random(d, n, phi, seed=int(rng.integers(0, 2**32)))


def recovery_probability(trials: int, seed: int) -> Dict[str, Any]:
    rows = []
    for phi in (0.2, 0.6, math.pi / 4, 1.2):
        cfg = ProtocolConfig.random(4, 3, phi, seed=seed)
        analytic = pipeline_success_probability(cfg)
        frame = records_frame(run_trials(ProtocolEngine(cfg), trials, seed))
        check = band_check("P[mu0]", math.cos(phi) ** 2, int(frame["success"].sum()), len(frame))
        rows.append({
            "phi": phi,
            "analytic_error": abs(analytic - math.cos(phi) ** 2),
            "empirical": check.observed,
            "band": check.band,
            "status": check.status,
        })
    passed = all(r["analytic_error"] <= 1e-12 and r["status"] == "ok" for r in rows)
    return {"passed": passed, "rows": rows}


def perfect_recovery(seed: int) -> Dict[str, Any]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(50):
        cfg = _random_config(rng)
        engine = ProtocolEngine(cfg)
        for branch in engine.branches:
            if branch.recovered is not None:
                worst = max(worst, trace_distance(branch.recovered, cfg.rho0))
    return {"passed": worst <= 1e-10, "max_trace_distance": worst}


def posterior_erasure(trials: int, seed: int) -> Dict[str, Any]:
    rng = np.random.default_rng(seed + 1)
    worst = 0.0
    for _ in range(50):
        cfg = _random_config(rng)
        post = posterior_given_success(cfg).probs
        worst = max(worst, float(np.max(np.abs(post - 1.0 / cfg.n))))

    cfg = ProtocolConfig.random(2, 4, 0.9, seed=seed, measurement="projective", state="random_pure")
    frame = records_frame(run_trials(ProtocolEngine(cfg), trials, seed))
    successes = frame.loc[frame["success"], "nu"]
    counts = successes.value_counts().reindex(range(1, 5), fill_value=0)
    checks = [band_check(f"P[nu={nu}|mu0]", 0.25, int(counts[nu]), len(successes)) for nu in range(1, 5)]

    witness = ProtocolConfig.random(2, 2, 1.2, seed=seed, measurement="projective")
    zero = DensityMatrix(np.diag([1.0, 0.0]))
    one = DensityMatrix(np.diag([0.0, 1.0]))
    dependence = outcome_dependence(witness, zero, one)
    flat = all(
        float(np.max(np.abs(posterior_given_success(witness.replace(rho0=rho)).probs - 0.5))) <= 1e-12
        for rho in (zero, one)
    )

    passed = worst <= 1e-12 and all(c.status == "ok" for c in checks) and dependence > 0.1 and flat
    return {
        "passed": passed,
        "max_posterior_deviation": worst,
        "empirical": [c.model_dump() for c in checks],
        "witness_outcome_dependence": dependence,
        "witness_posteriors_flat": flat,
    }


def tradeoff(seed: int) -> Dict[str, Any]:
    grid = [0.1 * k * math.pi / 2 for k in range(1, 10)]
    projective = ProtocolConfig.random(4, 2, 0.0, seed=seed, measurement="projective")
    worst = max(abs(tradeoff_check(projective.replace(phi=phi)).delta) for phi in grid)
    unitary = ProtocolConfig.random(2, 2, math.pi / 4, seed=seed, measurement="unitary")
    report = tradeoff_check(unitary, strict=False)
    return {
        "passed": worst <= 1e-10 and report.delta > 0 and not report.condition_holds,
        "max_delta_rank_deficient": worst,
        "unitary_delta": report.delta,
    }


def algebra_oracle(seed: int) -> Dict[str, Any]:
    rng = np.random.default_rng(seed + 2)
    ops: List[Callable] = [
        lambda x, y: (block_mul(x, y).to_dense(), x.to_dense() @ y.to_dense()),
        lambda x, y: (block_add(x, y).to_dense(), x.to_dense() + y.to_dense()),
        lambda x, y: (block_adjoint(x).to_dense(), x.to_dense().conj().T),
        lambda x, y: (np.array([block_trace(x)]), np.array([np.trace(x.to_dense())])),
    ]
    worst = 0.0
    for i in range(1000):
        d = int(rng.choice([1, 2, 4, 8]))
        blocks = lambda: {
            name: (ginibre(d, d, rng) if rng.random() < 0.7 else None)
            for name in ("diag_top", "diag_bot", "off_top", "off_bot")
        }
        x, y = BlockOperator(d, **blocks()), BlockOperator(d, **blocks())
        got, expected = ops[i % len(ops)](x, y)
        worst = max(worst, float(np.max(np.abs(got - expected))))
    return {"passed": worst <= 1e-12, "max_error": worst}


def instrument_validity(seed: int) -> Dict[str, Any]:
    rng = np.random.default_rng(seed + 3)
    worst = 0.0
    all_positive = True
    for _ in range(20):
        cfg = _random_config(rng, d_max=8)
        for inst in (quasi_copy_channel(cfg.phi, cfg.d), outer_measurement(cfg), recovery_instrument(cfg.d)):
            report = validate_instrument(inst, tol=1e-12)
            worst = max(worst, report.residual)
            all_positive = all_positive and all(report.positivity)
    return {"passed": worst <= 1e-12 and all_positive, "max_residual": worst}


def oracle_equivalence(seed: int) -> Dict[str, Any]:
    rng = np.random.default_rng(seed + 4)
    worst_table = 0.0
    worst_state = 0.0
    sequences_agree = True
    edge_cases = [(1, 1, 0.0), (1, 3, 0.7), (3, 2, 0.0), (2, 4, math.pi / 2)]
    for idx in range(20):
        if idx < len(edge_cases):
            d, n, phi = edge_cases[idx]
        else:
            d, n, phi = int(rng.choice([1, 2, 3, 4, 8])), int(rng.integers(1, 5)), float(rng.uniform(0, math.pi / 2))
        cfg = ProtocolConfig.random(d, n, phi, seed=seed + idx)
        block, dense = ProtocolEngine(cfg), DensePipeline(cfg)
        worst_table = max(worst_table, float(np.max(np.abs(joint_distribution(cfg) - dense.joint_distribution()))))
        worst_state = max(worst_state, branch_state_error(block, dense))
        sequences_agree = sequences_agree and trajectories_agree(
            run_trials(block, 10_000, seed + idx), run_trials(dense, 10_000, seed + idx)
        )
    tol = app_config.tolerances.cross_engine
    return {
        "passed": worst_table <= tol and worst_state <= tol and sequences_agree,
        "max_table_error": worst_table,
        "max_state_error": worst_state,
        "sequences_agree": sequences_agree,
    }


def qrm_statistics(seed: int) -> Dict[str, Any]:
    rng = np.random.default_rng(seed + 5)
    worst = 0.0
    for _ in range(50):
        cfg = _random_config(rng, d_max=6)
        measurement = matched_qrm_instrument(cfg).to_instrument()
        for _ in range(10):
            rho = haar_pure_state(cfg.d, rng)
            ours = outcome_probabilities(cfg.replace(rho0=rho))
            theirs = outcome_distribution(measurement, rho).probs
            worst = max(worst, float(np.max(np.abs(ours - theirs))))
    return {"passed": worst <= 1e-12, "max_error": worst}


def main():
    parser = argparse.ArgumentParser(description="Run the acceptance campaign")
    parser.add_argument("--trials", type=int, default=100_000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    setup_logging()
    start = time.perf_counter()
    checks = {
        "recovery_probability": lambda: recovery_probability(args.trials, args.seed),
        "perfect_recovery": lambda: perfect_recovery(args.seed),
        "posterior_erasure": lambda: posterior_erasure(args.trials, args.seed),
        "tradeoff": lambda: tradeoff(args.seed),
        "algebra_oracle": lambda: algebra_oracle(args.seed),
        "instrument_validity": lambda: instrument_validity(args.seed),
        "oracle_equivalence": lambda: oracle_equivalence(args.seed),
        "qrm_statistics": lambda: qrm_statistics(args.seed),
    }

    summary: Dict[str, Any] = {}
    for name, check in checks.items():
        logger.info(f"{'=' * 60}")
        logger.info(f"Running {name}")
        t0 = time.perf_counter()
        summary[name] = check()
        summary[name]["seconds"] = time.perf_counter() - t0
        mark = "✓" if summary[name]["passed"] else "✗"
        logger.info(f"{mark} {name} ({summary[name]['seconds']:.1f}s)")

    summary["all_passed"] = all(v["passed"] for v in summary.values() if isinstance(v, dict))
    summary["duration_seconds"] = time.perf_counter() - start

    RESULTS_DIR.mkdir(exist_ok=True)
    out = RESULTS_DIR / "acceptance_summary.json"
    out.write_text(json.dumps(summary, indent=2), encoding="utf-8")
    logger.info(f"Summary written to {out}")
    return 0 if summary["all_passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
