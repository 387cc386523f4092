"""Error types and error formatting utilities for FGLSS Lab."""

from typing import Any, Callable, TypeVar
from functools import wraps
import logging

# Type variable for generic function signatures
F = TypeVar('F', bound=Callable[..., Any])

# Logger for error tracking
logger = logging.getLogger(__name__)


class LabError(Exception):
    """Base class for every error raised by the lab."""


class LabInputError(LabError, ValueError):
    """Arity, range or parameter inconsistency in caller input."""


class PreconditionError(LabInputError):
    """A mathematical precondition of an operation does not hold."""


class ProofShapeError(LabInputError):
    """A proof does not fit the instance or query it is evaluated on."""


class MissingAnswerError(LabError):
    """A partial proof has no entry for the requested (tuple, input) pair."""


class MissingArtifactError(LabError):
    """A referenced artifact file does not exist."""

    def __init__(self, artifact: str, path: str):
        super().__init__(f"missing artifact '{artifact}': {path}")
        self.artifact = artifact
        self.path = path


class CapExceededError(LabError):
    """An exact computation would exceed its configured enumeration cap."""

    def __init__(self, operation: str, cost: int, cap: int, variable: str | None = None):
        message = (
            f"{operation} refused: estimated cost {cost} exceeds cap {cap}"
        )
        if variable:
            message += f" (raise {variable} to override)"
        super().__init__(message)
        self.operation = operation
        self.cost = cost
        self.cap = cap
        self.variable = variable


def format_validation_error(error: ValueError) -> dict[str, Any]:
    """Format validation errors into standardized error responses.

    Args:
        error: ValueError (or LabInputError) from validation functions

    Returns:
        dict: Standardized error response
    """
    error_type = "PreconditionError" if isinstance(error, PreconditionError) else "ValidationError"
    return {
        "error": True,
        "error_type": error_type,
        "message": "Invalid input",
        "details": str(error),
        "action": "Check the input parameters and try again."
    }


def format_cap_error(error: CapExceededError) -> dict[str, Any]:
    """Format enumeration cap refusals into standardized error responses.

    Args:
        error: CapExceededError raised by an exact computation

    Returns:
        dict: Standardized error response including the cost estimate
    """
    action = "Use a smaller instance or a Monte Carlo estimate."
    if error.variable:
        action += f" The cap can be raised with {error.variable}."
    return {
        "error": True,
        "error_type": "CapExceededError",
        "message": f"{error.operation} exceeds its enumeration cap",
        "details": str(error),
        "cost": error.cost,
        "cap": error.cap,
        "action": action,
    }


def format_artifact_error(error: MissingArtifactError) -> dict[str, Any]:
    """Format missing artifact errors into standardized error responses.

    Args:
        error: MissingArtifactError naming the missing file

    Returns:
        dict: Standardized error response
    """
    return {
        "error": True,
        "error_type": "MissingArtifactError",
        "message": f"Missing artifact: {error.artifact}",
        "details": str(error),
        "action": f"Produce {error.path} first (see the command that writes it)."
    }


def format_lab_error(error: Exception) -> dict[str, Any]:
    """Dispatch an exception to the matching formatter.

    Args:
        error: Any exception

    Returns:
        dict: Standardized error response
    """
    if isinstance(error, CapExceededError):
        return format_cap_error(error)
    if isinstance(error, MissingArtifactError):
        return format_artifact_error(error)
    if isinstance(error, ValueError):
        return format_validation_error(error)
    if isinstance(error, MissingAnswerError):
        return {
            "error": True,
            "error_type": "MissingAnswerError",
            "message": "Proof has no answer for a queried input",
            "details": str(error),
            "action": "Supply a complete table or a fallback proof."
        }
    return {
        "error": True,
        "error_type": "UnexpectedError",
        "message": "An unexpected error occurred",
        "details": str(error),
        "action": "Please report this error with the details above."
    }


def handle_lab_errors(func: F) -> F:
    """Decorator to handle lab errors and format them consistently.

    Catches common exceptions and formats them into standardized error responses:
    - CapExceededError -> format_cap_error()
    - MissingArtifactError -> format_artifact_error()
    - ValueError (including LabInputError) -> format_validation_error()
    - Exception -> UnexpectedError

    Args:
        func: Function to wrap with error handling

    Returns:
        Wrapped function that returns error dict on exception
    """
    @wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except CapExceededError as e:
            logger.warning("Cap refusal in %s: %s", func.__name__, e)
            return format_cap_error(e)
        except MissingArtifactError as e:
            logger.warning("Missing artifact in %s: %s", func.__name__, e)
            return format_artifact_error(e)
        except ValueError as e:
            logger.warning("Validation error in %s: %s", func.__name__, e)
            return format_validation_error(e)
        except Exception as e:  # pylint: disable=broad-exception-caught
            # Catch-all for unexpected errors
            logger.exception("Unexpected error in %s: %s", func.__name__, e)
            return format_lab_error(e)

    return wrapper  # type: ignore[return-value]
