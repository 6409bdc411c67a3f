"""
Error handlers for the CLI.
Map exceptions to exit codes and JSON error payloads.
"""
import json
from typing import Tuple

from loguru import logger
from pydantic import ValidationError

from src.cli.reports import ErrorReport
from src.errors import SimulationError

EXIT_OK = 0
EXIT_VERDICT_FAILED = 1
EXIT_INVALID_INPUT = 2


def validation_error_report(exc: ValidationError) -> ErrorReport:
    """
    Handle validation errors from Pydantic models.

    Args:
        exc: Validation exception

    Returns:
        ErrorReport with one message per failing field
    """
    errors = exc.errors()
    logger.warning(f"Validation error: {errors}")

    error_messages = []
    for error in errors:
        field = " -> ".join(str(loc) for loc in error["loc"])
        error_messages.append(f"{field}: {error['msg']}")

    serializable_errors = [
        {
            "loc": [str(loc) for loc in error.get("loc", [])],
            "msg": str(error.get("msg", "")),
            "type": str(error.get("type", "")),
        }
        for error in errors
    ]

    return ErrorReport(
        error="Validation error",
        error_code="VALIDATION_ERROR",
        details={"errors": error_messages, "raw_errors": serializable_errors},
    )


def handle_exception(exc: Exception) -> Tuple[int, ErrorReport]:
    """
    Turn an exception raised by a command into (exit code, error report).

    Invalid input (bad files, malformed JSON, schema or domain errors) gives
    exit code 2. Anything else is logged with its traceback and also exits 2.
    """
    if isinstance(exc, ValidationError):
        return EXIT_INVALID_INPUT, validation_error_report(exc)

    if isinstance(exc, SimulationError):
        logger.warning(f"{exc.error_code}: {exc.message}")
        return EXIT_INVALID_INPUT, ErrorReport(**exc.to_dict())

    if isinstance(exc, FileNotFoundError):
        logger.warning(f"File not found: {exc.filename}")
        return EXIT_INVALID_INPUT, ErrorReport(
            error=f"File not found: {exc.filename}",
            error_code="FILE_NOT_FOUND",
        )

    if isinstance(exc, json.JSONDecodeError):
        logger.warning(f"Malformed JSON: {exc}")
        return EXIT_INVALID_INPUT, ErrorReport(
            error=f"Malformed JSON: {exc.msg}",
            error_code="MALFORMED_JSON",
            details={"line": exc.lineno, "column": exc.colno},
        )

    if isinstance(exc, ValueError):
        logger.warning(f"Invalid input: {exc}")
        return EXIT_INVALID_INPUT, ErrorReport(error=str(exc), error_code="INVALID_INPUT")

    logger.error(f"Unhandled exception: {exc}")
    logger.exception("Full traceback:")
    return EXIT_INVALID_INPUT, ErrorReport(
        error=f"Internal error: {exc}",
        error_code="INTERNAL_ERROR",
    )
