"""
Monte Carlo campaigns: parallel trial execution and empirical summaries.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, List, Optional, Protocol, Sequence

import numpy as np
import pandas as pd
from loguru import logger

from src.cli.reports import BandCheck
from src.config import config as app_config
from src.protocol.models import TrialRecord
from src.quantum import RngStream

# Absorbs rounding when the band is zero (p exactly 0 or 1).
_BAND_SLACK = 1e-12


class TrialEngine(Protocol):
    engine_name: str

    def run_trial(self, stream: RngStream, trial: int = 0) -> TrialRecord:
        ...


def _run_chunk(engine: TrialEngine, seed: int, trials: Sequence[int]) -> List[TrialRecord]:
    return [engine.run_trial(RngStream.for_trial(seed, t), t) for t in trials]


def run_trials(engine: TrialEngine, n_trials: int, seed: int, threads: int = 1) -> List[TrialRecord]:
    """
    Run trials 0..n_trials-1, each on its own stream.

    Results are returned in trial-index order and do not depend on the
    number of threads.
    """
    if n_trials < 0:
        raise ValueError(f"Number of trials must be non-negative, got {n_trials}")
    threads = max(1, int(threads))
    indices = np.arange(n_trials)

    logger.info(f"Running {n_trials} trials on the {engine.engine_name} engine ({threads} thread(s))")
    if threads == 1 or n_trials < 2 * threads:
        return _run_chunk(engine, seed, indices.tolist())

    chunks = [chunk.tolist() for chunk in np.array_split(indices, threads)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(lambda chunk: _run_chunk(engine, seed, chunk), chunks))
    return [record for chunk in results for record in chunk]


def records_frame(records: Sequence[TrialRecord]) -> pd.DataFrame:
    """One row per trial."""
    return pd.DataFrame(
        {
            "trial": [r.trial for r in records],
            "engine": [r.engine for r in records],
            "nu": [r.nu for r in records],
            "mu": [r.mu for r in records],
            "success": [r.success for r in records],
            "p_nu": [r.p_nu for r in records],
            "p_mu_given_nu": [r.p_mu_given_nu for r in records],
            "fidelity": [r.fidelity_to_rho0 for r in records],
        }
    )


def band_check(
    name: str,
    expected: Optional[float],
    hits: int,
    count: int,
    k: Optional[float] = None,
) -> BandCheck:
    """
    Compare hits/count with expected using a k-sigma binomial band.

    Undefined when there are no trials to condition on or no closed form.
    """
    if k is None:
        k = app_config.tolerances.sigma_band
    if count == 0 or expected is None:
        return BandCheck(name=name, expected=expected, count=count, status="undefined")

    observed = hits / count
    sigma = math.sqrt(max(expected * (1.0 - expected), 0.0) / count)
    band = k * sigma
    status = "ok" if abs(observed - expected) <= band + _BAND_SLACK else "fail"
    return BandCheck(
        name=name, expected=expected, observed=observed,
        count=count, sigma=sigma, band=band, status=status,
    )


def summarize(
    frame: pd.DataFrame,
    n: int,
    p_rev: float,
    p_nu: Sequence[float],
    posterior: Optional[Sequence[float]],
    k: Optional[float] = None,
) -> List[BandCheck]:
    """Empirical P[mu0], P[nu] and P[nu|mu0] against their closed forms."""
    total = len(frame)
    outcomes = range(1, n + 1)
    successes = frame.loc[frame["success"], "nu"]

    nu_counts = frame["nu"].value_counts().reindex(outcomes, fill_value=0)
    success_counts = successes.value_counts().reindex(outcomes, fill_value=0)

    checks = [band_check("P[mu0]", p_rev, int(frame["success"].sum()), total, k)]
    checks.extend(
        band_check(f"P[nu={nu}]", float(p_nu[nu - 1]), int(nu_counts[nu]), total, k)
        for nu in outcomes
    )
    checks.extend(
        band_check(
            f"P[nu={nu}|mu0]",
            None if posterior is None else float(posterior[nu - 1]),
            int(success_counts[nu]),
            len(successes),
            k,
        )
        for nu in outcomes
    )
    return checks


def trajectories_agree(left: Sequence[TrialRecord], right: Sequence[TrialRecord]) -> bool:
    """Identical (nu, mu) sequences."""
    if len(left) != len(right):
        return False
    return all((a.nu, a.mu) == (b.nu, b.mu) for a, b in zip(left, right))


def branch_state_error(left: Any, right: Any) -> float:
    """
    Largest elementwise difference between the recovered and failure states of
    two precomputed engines, branch by branch.

    A state present in one engine and absent in the other counts as infinite.
    """
    if len(left.branches) != len(right.branches):
        return math.inf
    worst = 0.0
    for a, b in zip(left.branches, right.branches):
        for name in ("recovered", "failure_state"):
            sa, sb = getattr(a, name), getattr(b, name)
            if sa is None and sb is None:
                continue
            if sa is None or sb is None:
                return math.inf
            worst = max(worst, float(np.max(np.abs(sa.mat - sb.mat))))
    return worst
