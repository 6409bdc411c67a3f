"""
Error types for the simulator.

Every error carries a machine-readable ``error_code`` and optional ``details``,
mirroring the JSON error payloads the CLI emits.
"""
from typing import Any, Dict, Optional


class SimulationError(Exception):
    """Base class for all simulator errors."""

    error_code = "SIMULATION_ERROR"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        """Error payload in the CLI's JSON error format."""
        return {
            "success": False,
            "error": self.message,
            "error_code": self.error_code,
            "details": self.details,
        }


class DimensionMismatchError(SimulationError, ValueError):
    """Operands of incompatible shape."""
    error_code = "DIMENSION_MISMATCH"


class NonHermitianError(SimulationError, ValueError):
    """Operator required to be Hermitian is not."""
    error_code = "NON_HERMITIAN"


class InvalidStateError(SimulationError, ValueError):
    """Matrix is not a valid density matrix."""
    error_code = "INVALID_STATE"


class InvalidInstrumentError(SimulationError, ValueError):
    """Instrument fails positivity or completeness."""
    error_code = "INVALID_INSTRUMENT"


class IncompleteMeasurementError(InvalidInstrumentError):
    """Inner measurement family violates completeness."""
    error_code = "INCOMPLETE_MEASUREMENT"


class ZeroProbabilityError(SimulationError, ValueError):
    """Requested outcome has (numerically) zero probability."""
    error_code = "ZERO_PROBABILITY"


class OutcomeOutOfRangeError(SimulationError, ValueError):
    """Outcome label outside the instrument's range."""
    error_code = "OUTCOME_OUT_OF_RANGE"


class QuasiCopyPreconditionError(SimulationError, ValueError):
    """Quasi-copy shortcut applied to a state not of the form rho (+) 0."""
    error_code = "QUASI_COPY_PRECONDITION"


class UndefinedPosteriorError(SimulationError, ValueError):
    """Posterior conditioned on success is undefined because success never happens."""
    error_code = "UNDEFINED_POSTERIOR"


class SingularOperatorError(SimulationError, ValueError):
    """Measurement operator is not invertible, so its outcome is irreversible."""
    error_code = "SINGULAR_OPERATOR"


class TradeoffMismatchError(SimulationError, ValueError):
    """QRM and direct-sum reversal probabilities disagree where they must coincide."""
    error_code = "TRADEOFF_MISMATCH"


class EngineMismatchError(SimulationError, ValueError):
    """Block and dense engines disagree."""
    error_code = "ENGINE_MISMATCH"
