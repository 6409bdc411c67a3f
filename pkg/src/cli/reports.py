"""
Report models emitted by the CLI.

Every report carries its own verdicts and the inputs they were computed from,
so a report can be re-checked without rerunning anything.
"""
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field, computed_field

from src.quantum import InstrumentReport

# Fields that differ between otherwise identical runs.
TIMING_FIELDS = ("duration_seconds",)


class Verdict(BaseModel):
    """One pass/fail check."""

    name: str = Field(..., description="Check name")
    passed: bool = Field(..., description="Whether the check passed")
    detail: str = Field(default="", description="Human-readable explanation")


class BandCheck(BaseModel):
    """Empirical frequency against a closed form with a k-sigma binomial band."""

    name: str = Field(..., description="Quantity, e.g. 'P[mu0]' or 'P[nu=2|mu0]'")
    expected: Optional[float] = Field(default=None, description="Closed-form value")
    observed: Optional[float] = Field(default=None, description="Empirical frequency")
    count: int = Field(..., ge=0, description="Trials the frequency is computed over")
    sigma: Optional[float] = Field(default=None, description="sqrt(p (1 - p) / N)")
    band: Optional[float] = Field(default=None, description="k * sigma")
    status: Literal["ok", "fail", "undefined"] = Field(..., description="Band verdict")


class AnalyticSummary(BaseModel):
    """Closed-form quantities for the config."""

    p_nu: List[float] = Field(..., description="P[nu] for nu = 1..n")
    p_mu0_given_nu: List[Optional[float]] = Field(..., description="P[mu0|nu] (None where P[nu] = 0)")
    p_rev: float = Field(..., description="cos^2 phi")
    posterior: Optional[List[float]] = Field(default=None, description="P[nu|mu0]")
    posterior_status: Literal["ok", "undefined"] = Field(default="ok")


class ErrorReport(BaseModel):
    """Standard error payload."""

    success: bool = Field(default=False, description="Always false for errors")
    error: str = Field(..., description="Error message")
    error_code: Optional[str] = Field(default=None, description="Machine-readable error code")
    details: Optional[Dict[str, Any]] = Field(default=None, description="Additional error details")


class _VerdictReport(BaseModel):
    verdicts: List[Verdict] = Field(default_factory=list)

    @computed_field
    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)


class ValidateReport(_VerdictReport):
    """Positivity and completeness of every instrument derivable from a config."""

    command: Literal["validate"] = "validate"
    config: Dict[str, Any]
    inner_residual: float = Field(..., description="||sum M^dag M - 1||_F of the inner family")
    instruments: List[InstrumentReport] = Field(default_factory=list)
    duration_seconds: float = 0.0


class RunReport(_VerdictReport):
    """Single-run and Monte Carlo report."""

    command: Literal["run", "montecarlo"]
    config: Dict[str, Any]
    engine: str
    seed: int
    threads: int = 1
    analytic: AnalyticSummary
    trials: int = Field(default=0, ge=0)
    records: List[Dict[str, Any]] = Field(default_factory=list, description="TrialRecords (run only)")
    empirical: List[BandCheck] = Field(default_factory=list)
    duration_seconds: float = 0.0


class TradeoffRow(BaseModel):
    phi: float
    p_ours: float
    p_qrm: float
    delta: float
    condition_holds: bool
    min_eigs: List[float]


class TradeoffCommandReport(_VerdictReport):
    """QRM trade-off sweep over a phi grid."""

    command: Literal["tradeoff"] = "tradeoff"
    config: Dict[str, Any]
    rows: List[TradeoffRow] = Field(default_factory=list)
    series: Dict[str, List[Any]] = Field(default_factory=dict, description="Column-wise data for plotting")
    duration_seconds: float = 0.0


def render_text(report: BaseModel) -> str:
    """Short human-readable summary."""
    data = report.model_dump()
    lines = ["=" * 70, f"{data.get('command', 'report').upper()}", "=" * 70]
    if "error" in data:
        lines.append(f"Error [{data['error_code']}]: {data['error']}")

    if "engine" in data:
        lines.append(f"Engine: {data['engine']}   Seed: {data['seed']}   Trials: {data['trials']}")
    if "analytic" in data:
        analytic = data["analytic"]
        lines.append(f"P[rev] = {analytic['p_rev']:.12f}")
        lines.append("P[nu]  = " + ", ".join(f"{p:.6f}" for p in analytic["p_nu"]))
        if analytic["posterior"] is None:
            lines.append("P[nu|mu0] undefined")
        else:
            lines.append("P[nu|mu0] = " + ", ".join(f"{p:.6f}" for p in analytic["posterior"]))
    for inst in data.get("instruments", []):
        mark = "✓" if inst["passed"] else "✗"
        lines.append(f"{mark} {inst['name']}: residual {inst['residual']:.3e}")
    for check in data.get("empirical", []):
        if check["status"] == "undefined":
            lines.append(f"- {check['name']}: undefined (N={check['count']})")
        else:
            lines.append(
                f"{'✓' if check['status'] == 'ok' else '✗'} {check['name']}: "
                f"observed {check['observed']:.6f}, expected {check['expected']:.6f} "
                f"± {check['band']:.6f} (N={check['count']})"
            )
    for row in data.get("rows", []):
        lines.append(
            f"phi={row['phi']:.6f}  p_ours={row['p_ours']:.12f}  p_qrm={row['p_qrm']:.12f}  "
            f"delta={row['delta']:.3e}  condition={row['condition_holds']}"
        )
    for verdict in data.get("verdicts", []):
        mark = "✓" if verdict["passed"] else "✗"
        lines.append(f"{mark} {verdict['name']}" + (f": {verdict['detail']}" if verdict["detail"] else ""))

    lines.append("-" * 70)
    lines.append("PASS" if data.get("passed") else "FAIL")
    lines.append(f"Duration: {data.get('duration_seconds', 0.0):.2f}s")
    return "\n".join(lines)
