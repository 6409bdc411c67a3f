"""
Configuration module for the state recovery simulator.
Centralizes numerical tolerances, simulation defaults and logging settings.
"""
import os
from pathlib import Path
from dotenv import load_dotenv
from pydantic import BaseModel, Field

# Load environment variables
load_dotenv()

# Base paths
BASE_DIR = Path(__file__).parent.parent
CONFIG_DIR = BASE_DIR / "config"
RESULTS_DIR = BASE_DIR / "results"
LOGS_DIR = BASE_DIR / "logs"

# Ensure directories exist
LOGS_DIR.mkdir(exist_ok=True)

VALID_ENGINES = ("block", "dense", "both")


class ToleranceConfig(BaseModel):
    """Numerical tolerances shared by every module."""
    hermiticity: float = Field(default_factory=lambda: float(os.getenv("QSR_TOL_HERMITICITY", "1e-10")))
    analytic: float = Field(default_factory=lambda: float(os.getenv("QSR_TOL_ANALYTIC", "1e-10")))
    cross_engine: float = Field(default_factory=lambda: float(os.getenv("QSR_TOL_CROSS_ENGINE", "1e-12")))
    zero_probability: float = Field(default_factory=lambda: float(os.getenv("QSR_TOL_ZERO_PROBABILITY", "1e-14")))
    singular: float = Field(default_factory=lambda: float(os.getenv("QSR_TOL_SINGULAR", "1e-12")))
    sigma_band: float = Field(default_factory=lambda: float(os.getenv("QSR_SIGMA_BAND", "3.0")))


class SimulationConfig(BaseModel):
    """Monte Carlo defaults."""
    default_seed: int = Field(default_factory=lambda: int(os.getenv("QSR_SEED", "0")))
    default_trials: int = Field(default_factory=lambda: int(os.getenv("QSR_TRIALS", "100000")))
    threads: int = Field(default_factory=lambda: int(os.getenv("QSR_THREADS", "1")))
    engine: str = Field(default_factory=lambda: os.getenv("QSR_ENGINE", "block"))


class LoggingConfig(BaseModel):
    """Logging configuration."""
    level: str = Field(default_factory=lambda: os.getenv("LOG_LEVEL", "INFO"))
    file: Path = Field(default_factory=lambda: LOGS_DIR / os.getenv("LOG_FILE", "qsr.log"))


class Config:
    """Main configuration class."""

    def __init__(self):
        self.tolerances = ToleranceConfig()
        self.simulation = SimulationConfig()
        self.logging = LoggingConfig()

        # Paths
        self.config_dir = CONFIG_DIR
        self.results_dir = RESULTS_DIR
        self.logs_dir = LOGS_DIR

    def validate(self) -> bool:
        """Validate configuration."""
        for name, value in self.tolerances.model_dump().items():
            if value <= 0:
                raise ValueError(f"Tolerance '{name}' must be positive, got {value}")

        if self.tolerances.zero_probability > self.tolerances.analytic:
            raise ValueError("QSR_TOL_ZERO_PROBABILITY must not exceed QSR_TOL_ANALYTIC")

        if self.simulation.threads < 1:
            raise ValueError("QSR_THREADS must be >= 1")

        if self.simulation.engine not in VALID_ENGINES:
            raise ValueError(
                f"QSR_ENGINE '{self.simulation.engine}' not valid. "
                f"Valid engines: {', '.join(VALID_ENGINES)}"
            )

        return True

    def __repr__(self) -> str:
        """String representation."""
        return f"""
Config:
  Tolerances:
    - Hermiticity: {self.tolerances.hermiticity:g}
    - Analytic: {self.tolerances.analytic:g}
    - Cross-engine: {self.tolerances.cross_engine:g}
    - Zero probability: {self.tolerances.zero_probability:g}
    - Singular: {self.tolerances.singular:g}
    - Sigma band: {self.tolerances.sigma_band:g}

  Simulation:
    - Seed: {self.simulation.default_seed}
    - Trials: {self.simulation.default_trials}
    - Threads: {self.simulation.threads}
    - Engine: {self.simulation.engine}

  Logging:
    - Level: {self.logging.level}
    - File: {self.logging.file}
"""


# Global config instance
config = Config()
