"""
Protocol configuration and trial records.

ProtocolConfigFile is the JSON wire format (with random-family shortcuts);
ProtocolConfig is the resolved numerical configuration used by the engines.
"""
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

from src.config import config as app_config
from src.errors import DimensionMismatchError, IncompleteMeasurementError, InvalidStateError
from src.matrices import ComplexMatrix, MatrixPayload, encode_matrix
from src.quantum.random_families import MEASUREMENT_FAMILIES, STATE_FAMILIES
from src.quantum.rng import family_generator
from src.quantum.states import DensityMatrix


class FamilySpec(BaseModel):
    """Seeded random family shortcut."""

    family: str = Field(..., description="Family name")
    seed: Optional[int] = Field(default=None, ge=0, description="Family seed (defaults to the config seed)")
    rank: Optional[int] = Field(default=None, ge=1, description="Wishart rank for random_mixed")


class ProtocolConfigFile(BaseModel):
    """ProtocolConfig JSON as read from disk."""

    d: int = Field(..., ge=1, description="Dimension of the system Hilbert space")
    phi: float = Field(..., description="Quasi-copy angle in radians")
    n: int = Field(..., ge=1, description="Number of inner measurement outcomes")
    inner_measurement: Union[List[MatrixPayload], FamilySpec] = Field(
        ..., description="Explicit M_nu matrices or a random family"
    )
    rho0: Union[MatrixPayload, FamilySpec] = Field(
        ..., description="Explicit initial state or a random family"
    )
    seed: Optional[int] = Field(default=None, ge=0, lt=2**64, description="Global seed")

    @field_validator("phi")
    @classmethod
    def validate_phi(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("phi must be finite")
        return v

    @field_validator("inner_measurement")
    @classmethod
    def validate_measurement_family(cls, v):
        if isinstance(v, FamilySpec) and v.family not in MEASUREMENT_FAMILIES:
            raise ValueError(
                f"Unknown measurement family '{v.family}'. "
                f"Valid families: {', '.join(MEASUREMENT_FAMILIES)}"
            )
        return v

    @field_validator("rho0")
    @classmethod
    def validate_state_family(cls, v):
        if isinstance(v, FamilySpec) and v.family not in STATE_FAMILIES:
            raise ValueError(
                f"Unknown state family '{v.family}'. Valid families: {', '.join(STATE_FAMILIES)}"
            )
        return v

    @model_validator(mode="after")
    def check_explicit_count(self) -> "ProtocolConfigFile":
        if isinstance(self.inner_measurement, list) and len(self.inner_measurement) != self.n:
            raise ValueError(
                f"inner_measurement lists {len(self.inner_measurement)} matrices, expected n={self.n}"
            )
        return self

    def build(self, seed: Optional[int] = None, strict: bool = True) -> "ProtocolConfig":
        """
        Resolve families into matrices.

        Args:
            seed: Overrides the file's seed (CLI --seed)
            strict: Enforce completeness of the inner measurement

        Returns:
            ProtocolConfig
        """
        if seed is None:
            seed = self.seed if self.seed is not None else app_config.simulation.default_seed

        if isinstance(self.inner_measurement, FamilySpec):
            shortcut = self.inner_measurement
            rng = family_generator(shortcut.seed if shortcut.seed is not None else seed, f"measurement/{shortcut.family}")
            inner = MEASUREMENT_FAMILIES[shortcut.family](self.d, self.n, rng)
        else:
            inner = [m.to_array() for m in self.inner_measurement]

        if isinstance(self.rho0, FamilySpec):
            shortcut = self.rho0
            rng = family_generator(shortcut.seed if shortcut.seed is not None else seed, f"state/{shortcut.family}")
            if shortcut.family == "random_mixed" and shortcut.rank is not None:
                rho0 = STATE_FAMILIES[shortcut.family](self.d, rng, shortcut.rank)
            else:
                rho0 = STATE_FAMILIES[shortcut.family](self.d, rng)
        else:
            rho0 = DensityMatrix(self.rho0.to_array())

        return ProtocolConfig(
            d=self.d, phi=self.phi, n=self.n,
            inner_measurement=inner, rho0=rho0, seed=seed, strict=strict,
        )


class ProtocolConfig:
    """Resolved protocol parameters: d, phi, n, {M_nu}, rho0, seed."""

    def __init__(
        self,
        d: int,
        phi: float,
        n: int,
        inner_measurement: Sequence[ComplexMatrix],
        rho0: Union[DensityMatrix, ComplexMatrix],
        seed: int = 0,
        strict: bool = True,
    ):
        """
        Initialize configuration.

        Args:
            d: Dimension of H'_d
            phi: Quasi-copy angle (any real)
            n: Number of outcomes nu = 1..n
            inner_measurement: n matrices M_nu, each d x d
            rho0: Initial state on H'_d
            seed: Global seed
            strict: Require sum M^dag M = 1 within the analytic tolerance

        Raises:
            DimensionMismatchError: On inconsistent shapes or counts
            InvalidStateError: If rho0 is not a valid density matrix
            IncompleteMeasurementError: If strict and the inner family is incomplete
        """
        if d < 1 or n < 1:
            raise DimensionMismatchError(f"d and n must be positive, got d={d}, n={n}")
        self.d = int(d)
        self.phi = float(phi)
        self.n = int(n)
        self.seed = int(seed)

        ops = [np.array(m, dtype=np.complex128) for m in inner_measurement]
        if len(ops) != self.n:
            raise DimensionMismatchError(f"Expected {self.n} measurement operators, got {len(ops)}")
        for idx, m in enumerate(ops, start=1):
            if m.shape != (self.d, self.d):
                raise DimensionMismatchError(
                    f"M_{idx} has shape {m.shape}, expected ({self.d}, {self.d})"
                )
            m.setflags(write=False)
        self.inner_measurement: List[ComplexMatrix] = ops

        if not isinstance(rho0, DensityMatrix):
            rho0 = DensityMatrix(rho0)
        if rho0.dim != self.d:
            raise InvalidStateError(f"rho0 has dimension {rho0.dim}, expected {self.d}")
        self.rho0 = rho0

        if strict:
            self.require_complete()

    @property
    def cos2(self) -> float:
        return math.cos(self.phi) ** 2

    @property
    def sin2(self) -> float:
        return math.sin(self.phi) ** 2

    def inner_completeness_residual(self) -> float:
        """Frobenius norm of sum M_nu^dag M_nu - 1."""
        total = sum(m.conj().T @ m for m in self.inner_measurement)
        return float(np.linalg.norm(total - np.eye(self.d), ord="fro"))

    def require_complete(self) -> None:
        residual = self.inner_completeness_residual()
        if residual > app_config.tolerances.analytic:
            raise IncompleteMeasurementError(
                f"Inner measurement is not complete (residual {residual:.3e})",
                details={"residual": residual},
            )

    def replace(self, **changes: Any) -> "ProtocolConfig":
        """Copy with some fields changed, e.g. replace(phi=0.3) or replace(rho0=state)."""
        fields = {
            "d": self.d, "phi": self.phi, "n": self.n,
            "inner_measurement": self.inner_measurement,
            "rho0": self.rho0, "seed": self.seed, "strict": False,
        }
        fields.update(changes)
        return ProtocolConfig(**fields)

    def to_json(self) -> Dict[str, Any]:
        """Fully resolved config echo (explicit matrices)."""
        return {
            "d": self.d,
            "phi": self.phi,
            "n": self.n,
            "inner_measurement": [encode_matrix(m) for m in self.inner_measurement],
            "rho0": encode_matrix(self.rho0.mat),
            "seed": self.seed,
        }

    @classmethod
    def random(
        cls,
        d: int,
        n: int,
        phi: float,
        seed: int,
        measurement: str = "random_povm",
        state: str = "random_mixed",
    ) -> "ProtocolConfig":
        """Config drawn from the named random families, fully determined by seed."""
        return ProtocolConfigFile(
            d=d, phi=phi, n=n,
            inner_measurement=FamilySpec(family=measurement),
            rho0=FamilySpec(family=state),
            seed=seed,
        ).build()

    @classmethod
    def from_dict(cls, obj: Dict[str, Any], seed: Optional[int] = None, strict: bool = True) -> "ProtocolConfig":
        return ProtocolConfigFile.model_validate(obj).build(seed=seed, strict=strict)

    @classmethod
    def from_file(cls, path: Union[str, Path], seed: Optional[int] = None, strict: bool = True) -> "ProtocolConfig":
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_dict(json.load(f), seed=seed, strict=strict)

    def __repr__(self) -> str:
        return f"<ProtocolConfig d={self.d} n={self.n} phi={self.phi:.6f} seed={self.seed}>"


class TrialRecord(BaseModel):
    """One end-to-end run: sampled outcomes, probabilities, recovered state."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    trial: int = Field(default=0, ge=0, description="Trial index")
    engine: str = Field(..., description="block, dense or qrm")
    nu: int = Field(..., ge=1, description="Sampled first-measurement outcome (1-based)")
    mu: Literal["mu0", "mu1"] = Field(..., description="Sampled recovery outcome")
    p_nu: float = Field(..., ge=0.0, le=1.0, description="P[nu]")
    p_mu_given_nu: float = Field(..., ge=0.0, le=1.0, description="P[mu0 | nu]")
    recovered: Optional[DensityMatrix] = Field(default=None, description="State after success")
    failure_state: Optional[DensityMatrix] = Field(default=None, description="State after mu1")
    fidelity_to_rho0: float = Field(..., ge=0.0, le=1.0)

    @field_validator("p_nu", "p_mu_given_nu", mode="before")
    @classmethod
    def clip_probability(cls, v: float) -> float:
        """Absorb rounding just outside [0, 1]."""
        v = float(v)
        tol = app_config.tolerances.analytic
        if -tol <= v < 0.0:
            return 0.0
        if 1.0 < v <= 1.0 + tol:
            return 1.0
        return v

    @model_validator(mode="after")
    def check_recovered(self) -> "TrialRecord":
        if (self.mu == "mu0") != (self.recovered is not None):
            raise ValueError("recovered must be present iff mu == 'mu0'")
        return self

    @property
    def success(self) -> bool:
        return self.mu == "mu0"

    @field_serializer("recovered", "failure_state")
    def serialize_state(self, state: Optional[DensityMatrix]) -> Optional[Dict[str, Any]]:
        return None if state is None else encode_matrix(state.mat)

    def to_json_line(self) -> str:
        return self.model_dump_json()
