"""Input validation helpers shared by the library, the CLI and the MCP tools."""

from fractions import Fraction
from typing import Any

from .errors import LabInputError

# Largest generator count the lab accepts (K = 63)
MAX_R = 6


def validate_positive_int(value: Any, param_name: str) -> int:
    """Validate a positive integer parameter.

    Args:
        value: Value to validate (int or numeric string)
        param_name: Parameter name for error messages

    Returns:
        int: Validated value

    Raises:
        LabInputError: If value is not a positive integer
    """
    value = _coerce_int(value, param_name)
    if value <= 0:
        raise LabInputError(f"{param_name} must be a positive integer, got: {value}")
    return value


def validate_non_negative_int(value: Any, param_name: str) -> int:
    """Validate a non-negative integer parameter.

    Args:
        value: Value to validate (int or numeric string)
        param_name: Parameter name for error messages

    Returns:
        int: Validated value

    Raises:
        LabInputError: If value is negative or not an integer
    """
    value = _coerce_int(value, param_name)
    if value < 0:
        raise LabInputError(f"{param_name} must be a non-negative integer, got: {value}")
    return value


def _coerce_int(value: Any, param_name: str) -> int:
    # Reject floats and bools explicitly
    if isinstance(value, (float, bool)):
        raise LabInputError(
            f"{param_name} must be an integer, got {type(value).__name__}: {value}"
        )
    if not isinstance(value, int):
        try:
            value = int(value)
        except (ValueError, TypeError) as e:
            raise LabInputError(
                f"{param_name} must be an integer, got {type(value).__name__}: {value}"
            ) from e
    return value


def validate_r(r: Any) -> int:
    """Validate the generator count r of the Hadamard predicate (K = 2^r - 1).

    Raises:
        LabInputError: If r is not an integer in [1, MAX_R]
    """
    r = validate_positive_int(r, "r")
    if r > MAX_R:
        raise LabInputError(f"r must be <= {MAX_R}, got: {r}")
    return r


def validate_bit(bit: Any, param_name: str = "bit") -> int:
    """Validate a multiplicative bit (+1 or -1)."""
    bit = _coerce_int(bit, param_name)
    if bit not in (-1, 1):
        raise LabInputError(f"{param_name} must be +1 or -1, got: {bit}")
    return bit


def validate_eta(eta: Any) -> Fraction:
    """Validate a noise rate.

    Accepts ints, Fractions, floats and strings such as "1/9" or "0.1".

    Returns:
        Fraction: Exact noise rate in [0, 1)

    Raises:
        LabInputError: If eta cannot be parsed or lies outside [0, 1)
    """
    try:
        if isinstance(eta, float):
            value = Fraction(str(eta))
        else:
            value = Fraction(eta)
    except (ValueError, TypeError, ZeroDivisionError) as e:
        raise LabInputError(
            f"eta must be a number or 'num/den' string, got {type(eta).__name__}: {eta}"
        ) from e
    if value < 0 or value >= 1:
        raise LabInputError(f"eta must satisfy 0 <= eta < 1, got: {value}")
    return value


def validate_seed(seed: Any) -> int:
    """Validate an rng seed (non-negative integer)."""
    return validate_non_negative_int(seed, "seed")


def validate_fraction(value: Any, param_name: str) -> Fraction:
    """Parse a 'num/den' string (or int/Fraction) into a non-negative Fraction."""
    try:
        result = Fraction(value)
    except (ValueError, TypeError, ZeroDivisionError) as e:
        raise LabInputError(
            f"{param_name} must be a 'num/den' rational, got {type(value).__name__}: {value}"
        ) from e
    if result < 0:
        raise LabInputError(f"{param_name} must be non-negative, got: {result}")
    return result


def validate_alpha(alpha: Any, t: Any) -> tuple[int, int]:
    """Validate an extension suffix: returns (alpha, t) with 0 <= alpha < 2^t."""
    t = validate_non_negative_int(t, "t")
    alpha = validate_non_negative_int(alpha, "alpha")
    if alpha >= 2**t:
        raise LabInputError(f"alpha must be < 2^t = {2**t}, got: {alpha}")
    return alpha, t
