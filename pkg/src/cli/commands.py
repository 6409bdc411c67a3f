"""
CLI commands: validate, run, montecarlo, tradeoff.

Each command returns (exit code, report). Exceptions propagate to main(),
which maps them to exit code 2.
"""
import math
import time
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger

from src.cli.error_handlers import EXIT_OK, EXIT_VERDICT_FAILED
from src.cli.montecarlo import TrialEngine, records_frame, run_trials, summarize, trajectories_agree
from src.cli.reports import (
    AnalyticSummary,
    RunReport,
    TradeoffCommandReport,
    TradeoffRow,
    ValidateReport,
    Verdict,
)
from src.config import config as app_config
from src.errors import EngineMismatchError, UndefinedPosteriorError, ZeroProbabilityError
from src.oracle import DensePipeline, dense_outer_measurement, dense_quasi_copy, dense_recovery
from src.protocol import (
    ProtocolConfig,
    ProtocolEngine,
    TrialRecord,
    outcome_probabilities,
    outer_measurement,
    posterior_given_success,
    quasi_copy_channel,
    recovery_instrument,
    reversal_probability,
    success_given_outcome,
)
from src.qrm import tradeoff_check
from src.quantum import InstrumentKind, QuantumInstrument, RngStream, validate_instrument

PathLike = Union[str, Path]

ENGINES = {
    "block": ProtocolEngine,
    "dense": DensePipeline,
}


def default_phi_grid(points: int = 11) -> List[float]:
    """k pi / (2 (points - 1)) for k = 0..points-1; includes 0 and pi/2."""
    return [k * math.pi / (2 * (points - 1)) for k in range(points)]


def load_config(path: PathLike, seed: Optional[int] = None, strict: bool = True) -> ProtocolConfig:
    """Load a config file and warn about redundant angles."""
    cfg = ProtocolConfig.from_file(path, seed=seed, strict=strict)
    if not 0.0 <= cfg.phi <= math.pi / 2:
        logger.warning(
            f"phi={cfg.phi:.6f} lies outside [0, pi/2]; only cos^2 and sin^2 of it matter"
        )
    logger.info(f"Loaded {cfg} from {path}")
    return cfg


def engine_names(engine: str) -> List[str]:
    if engine == "both":
        return ["block", "dense"]
    if engine not in ENGINES:
        raise ValueError(f"Unknown engine '{engine}'. Valid engines: block, dense, both")
    return [engine]


def analytic_summary(cfg: ProtocolConfig) -> AnalyticSummary:
    """Closed-form quantities, with undefined entries reported as such."""
    conditional: List[Optional[float]] = []
    for nu in range(1, cfg.n + 1):
        try:
            conditional.append(success_given_outcome(nu, cfg))
        except ZeroProbabilityError:
            conditional.append(None)

    try:
        posterior = posterior_given_success(cfg).probs.tolist()
        status = "ok"
    except UndefinedPosteriorError:
        posterior, status = None, "undefined"

    return AnalyticSummary(
        p_nu=outcome_probabilities(cfg).tolist(),
        p_mu0_given_nu=conditional,
        p_rev=reversal_probability(cfg.phi),
        posterior=posterior,
        posterior_status=status,
    )


def _state_distance(a: TrialRecord, b: TrialRecord) -> float:
    left = a.recovered if a.success else a.failure_state
    right = b.recovered if b.success else b.failure_state
    return float(np.max(np.abs(left.mat - right.mat)))


def compare_records(block: TrialRecord, dense: TrialRecord) -> None:
    """
    Raises:
        EngineMismatchError: If outcomes, probabilities or states disagree
    """
    tol = app_config.tolerances.cross_engine
    if (block.nu, block.mu) != (dense.nu, dense.mu):
        raise EngineMismatchError(
            f"Trial {block.trial}: block ({block.nu}, {block.mu}) vs dense ({dense.nu}, {dense.mu})"
        )
    diffs = {
        "p_nu": abs(block.p_nu - dense.p_nu),
        "p_mu_given_nu": abs(block.p_mu_given_nu - dense.p_mu_given_nu),
        "state": _state_distance(block, dense),
    }
    worst = max(diffs, key=diffs.get)
    if diffs[worst] > tol:
        raise EngineMismatchError(
            f"Trial {block.trial}: {worst} differs by {diffs[worst]:.3e}",
            details=diffs,
        )


def _engine_agreement(runs: Dict[str, Sequence[TrialRecord]]) -> Verdict:
    block, dense = runs["block"], runs["dense"]
    if not trajectories_agree(block, dense):
        return Verdict(name="engine_agreement", passed=False, detail="(nu, mu) sequences differ")
    try:
        for a, b in zip(block, dense):
            compare_records(a, b)
    except EngineMismatchError as e:
        return Verdict(name="engine_agreement", passed=False, detail=e.message)
    return Verdict(name="engine_agreement", passed=True, detail=f"{len(block)} trial(s) agree")


def _fidelity_verdict(records: Sequence[TrialRecord]) -> Verdict:
    successes = [r.fidelity_to_rho0 for r in records if r.success]
    if not successes:
        return Verdict(name="recovery_fidelity", passed=True, detail="no successful trials")
    worst = min(successes)
    return Verdict(
        name="recovery_fidelity",
        passed=worst >= 1.0 - app_config.tolerances.analytic,
        detail=f"min fidelity {worst:.15f} over {len(successes)} success(es)",
    )


def cmd_validate(config_path: PathLike, seed: Optional[int] = None) -> Tuple[int, ValidateReport]:
    """Check positivity and completeness of every instrument derivable from the config."""
    start = time.perf_counter()
    cfg = load_config(config_path, seed=seed, strict=False)

    inner = QuantumInstrument(
        InstrumentKind.MEASUREMENT,
        [(str(nu), m) for nu, m in enumerate(cfg.inner_measurement, start=1)],
    )
    named = [
        ("inner_measurement", inner),
        ("quasi_copy[block]", quasi_copy_channel(cfg.phi, cfg.d)),
        ("outer_measurement[block]", outer_measurement(cfg, strict=False)),
        ("recovery[block]", recovery_instrument(cfg.d)),
        ("quasi_copy[dense]", dense_quasi_copy(cfg.phi, cfg.d)),
        ("outer_measurement[dense]", dense_outer_measurement(cfg, strict=False)),
        ("recovery[dense]", dense_recovery(cfg.d)),
    ]
    reports = [validate_instrument(inst, name=name) for name, inst in named]
    verdicts = [
        Verdict(name=r.name, passed=r.passed, detail=f"residual {r.residual:.3e}")
        for r in reports
    ]

    report = ValidateReport(
        config=cfg.to_json(),
        inner_residual=cfg.inner_completeness_residual(),
        instruments=reports,
        verdicts=verdicts,
        duration_seconds=time.perf_counter() - start,
    )
    return (EXIT_OK if report.passed else EXIT_VERDICT_FAILED), report


def cmd_run(
    config_path: PathLike, seed: Optional[int] = None, engine: str = "block"
) -> Tuple[int, RunReport]:
    """One trial, full TrialRecord per engine."""
    start = time.perf_counter()
    cfg = load_config(config_path, seed=seed)
    names = engine_names(engine)

    stream = RngStream.for_trial(cfg.seed, 0)
    runs = {name: [ENGINES[name](cfg).run_trial(stream, 0)] for name in names}
    records = [runs[name][0] for name in names]

    analytic = analytic_summary(cfg)
    verdicts = [_fidelity_verdict(records)]
    for record in records:
        expected = analytic.p_nu[record.nu - 1]
        verdicts.append(Verdict(
            name=f"p_nu_closed_form[{record.engine}]",
            passed=abs(record.p_nu - expected) <= app_config.tolerances.analytic,
            detail=f"recorded {record.p_nu:.15f}, closed form {expected:.15f}",
        ))
    if len(names) == 2:
        verdicts.append(_engine_agreement(runs))

    report = RunReport(
        command="run",
        config=cfg.to_json(),
        engine=engine,
        seed=cfg.seed,
        analytic=analytic,
        trials=1,
        records=[r.model_dump() for r in records],
        verdicts=verdicts,
        duration_seconds=time.perf_counter() - start,
    )
    return (EXIT_OK if report.passed else EXIT_VERDICT_FAILED), report


def cmd_montecarlo(
    config_path: PathLike,
    n_trials: int,
    seed: Optional[int] = None,
    engine: str = "block",
    threads: int = 1,
    records_path: Optional[PathLike] = None,
) -> Tuple[int, RunReport]:
    """N trials with empirical frequencies checked against the closed forms."""
    start = time.perf_counter()
    if n_trials < 1:
        raise ValueError(f"Number of trials must be positive, got {n_trials}")
    cfg = load_config(config_path, seed=seed)
    names = engine_names(engine)

    runs: Dict[str, List[TrialRecord]] = {}
    for name in names:
        runner: TrialEngine = ENGINES[name](cfg)
        runs[name] = run_trials(runner, n_trials, cfg.seed, threads)

    primary = runs[names[0]]
    analytic = analytic_summary(cfg)
    checks = summarize(
        records_frame(primary),
        n=cfg.n,
        p_rev=analytic.p_rev,
        p_nu=analytic.p_nu,
        posterior=analytic.posterior,
    )

    verdicts = [
        Verdict(
            name=f"band:{c.name}",
            passed=c.status != "fail",
            detail=c.status if c.status != "fail" else f"observed {c.observed:.6f} outside {c.expected:.6f} ± {c.band:.6f}",
        )
        for c in checks
    ]
    verdicts.append(_fidelity_verdict(primary))
    if len(names) == 2:
        verdicts.append(_engine_agreement(runs))

    if records_path is not None:
        write_records(records_path, [r for name in names for r in runs[name]])

    report = RunReport(
        command="montecarlo",
        config=cfg.to_json(),
        engine=engine,
        seed=cfg.seed,
        threads=threads,
        analytic=analytic,
        trials=n_trials,
        empirical=checks,
        verdicts=verdicts,
        duration_seconds=time.perf_counter() - start,
    )
    logger.info(f"Monte Carlo finished: {'PASS' if report.passed else 'FAIL'}")
    return (EXIT_OK if report.passed else EXIT_VERDICT_FAILED), report


def write_records(path: PathLike, records: Sequence[TrialRecord]) -> None:
    """TrialRecords as JSON lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(record.to_json_line() + "\n")
    logger.info(f"Wrote {len(records)} trial records to {path}")


def cmd_tradeoff(
    config_path: PathLike,
    phi_grid: Optional[Sequence[float]] = None,
    seed: Optional[int] = None,
) -> Tuple[int, TradeoffCommandReport]:
    """QRM versus direct-sum reversal probability across a phi grid."""
    start = time.perf_counter()
    cfg = load_config(config_path, seed=seed)
    grid = list(phi_grid) if phi_grid else default_phi_grid()
    tol = app_config.tolerances.analytic

    rows = []
    for phi in grid:
        tr = tradeoff_check(cfg.replace(phi=phi), strict=False)
        rows.append(TradeoffRow(
            phi=tr.phi, p_ours=tr.p_ours, p_qrm=tr.p_qrm, delta=tr.delta,
            condition_holds=tr.condition_holds, min_eigs=tr.min_eigs,
        ))

    frame = pd.DataFrame([row.model_dump() for row in rows])
    predicted = frame["p_ours"] + np.sin(frame["phi"]) ** 2 * frame["min_eigs"].apply(sum)

    holds = frame[frame["condition_holds"]]
    fails = frame[~frame["condition_holds"]]
    verdicts = [
        Verdict(
            name="tradeoff_equality",
            passed=bool((holds["delta"].abs() <= tol).all()),
            detail=f"{len(holds)} grid point(s) with zero min-eigenvalue condition",
        ),
        Verdict(
            name="qrm_not_below_ours",
            passed=bool((fails["delta"] >= -tol).all()),
            detail=f"{len(fails)} grid point(s) where the condition fails",
        ),
        Verdict(
            name="qrm_closed_form",
            passed=bool(((frame["p_qrm"] - predicted).abs() <= tol).all()),
            detail="p_qrm = cos^2 phi + sin^2 phi sum_nu min-eig(M_nu^dag M_nu)",
        ),
    ]

    report = TradeoffCommandReport(
        config=cfg.to_json(),
        rows=rows,
        series={
            key: [getattr(row, key) for row in rows]
            for key in ("phi", "p_ours", "p_qrm", "delta", "condition_holds")
        },
        verdicts=verdicts,
        duration_seconds=time.perf_counter() - start,
    )
    return (EXIT_OK if report.passed else EXIT_VERDICT_FAILED), report
