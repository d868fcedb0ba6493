"""
Parameter validators

Shared argument checks for the service layer. Every validator returns the
normalised value or raises InvalidParameterError.
"""

import math
from typing import Sequence

import numpy as np

from .errors import InvalidParameterError

SIMPLEX_TOLERANCE = 1e-9
LOSS_TOLERANCE = 1e-9


def validate_index(value: int, upper: int, name: str) -> int:
    """
    Validate a 0-based index

    Args:
        value: Index to check
        upper: Exclusive upper bound
        name: Parameter name used in the error message

    Returns:
        The index as a plain int

    Raises:
        InvalidParameterError: index is not an integer or outside [0, upper)
    """
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise InvalidParameterError(f"{name} must be an integer, got {value!r}")
    if not 0 <= value < upper:
        raise InvalidParameterError(
            f"{name}={value} out of range",
            suggestion=f"{name} must lie in [0, {upper - 1}]"
        )
    return int(value)


def validate_positive_int(value: int, name: str, minimum: int = 1) -> int:
    """Validate an integer >= minimum"""
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise InvalidParameterError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise InvalidParameterError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def validate_probability(p: float, name: str = "p") -> float:
    """Validate a probability in [0, 1]"""
    if not isinstance(p, (int, float, np.floating)) or not 0.0 <= float(p) <= 1.0:
        raise InvalidParameterError(f"{name} must lie in [0, 1], got {p!r}")
    return float(p)


def validate_eta(eta: float) -> float:
    """
    Validate a step size

    Raises:
        InvalidParameterError: eta outside (0, 1]
    """
    if not isinstance(eta, (int, float, np.floating)) or not math.isfinite(float(eta)):
        raise InvalidParameterError(f"eta must be a real number, got {eta!r}")
    if not 0.0 < float(eta) <= 1.0:
        raise InvalidParameterError(
            f"eta={eta} outside (0, 1]",
            suggestion="The contextual regret bound requires a step size in (0, 1]"
        )
    return float(eta)


def validate_loss_entries(values: np.ndarray, name: str = "loss") -> np.ndarray:
    """
    Validate that every loss entry lies in [-1, 1] up to LOSS_TOLERANCE

    Returns:
        The values as a float64 array
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1:
        raise InvalidParameterError(f"{name} must be a vector, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise InvalidParameterError(f"{name} contains non-finite entries")
    bound = 1.0 + LOSS_TOLERANCE
    if np.any(np.abs(values) > bound):
        worst = int(np.argmax(np.abs(values)))
        raise InvalidParameterError(
            f"{name}[{worst}]={values[worst]!r} outside [-1, 1]",
            suggestion="Losses are bounded by the bounded-cost assumption"
        )
    return values


def validate_transition_matrix(matrix: Sequence[Sequence[float]], num_states: int) -> np.ndarray:
    """
    Validate a row-stochastic matrix of shape (num_states, num_states)

    Raises:
        InvalidParameterError: wrong shape, negative entry or a row not summing to 1
    """
    array = np.asarray(matrix, dtype=np.float64)
    if array.shape != (num_states, num_states):
        raise InvalidParameterError(
            f"transition matrix must have shape ({num_states}, {num_states}), got {array.shape}"
        )
    if np.any(array < 0):
        raise InvalidParameterError("transition matrix has negative entries")
    row_sums = array.sum(axis=1)
    bad_rows = np.flatnonzero(np.abs(row_sums - 1.0) > SIMPLEX_TOLERANCE)
    if bad_rows.size:
        row = int(bad_rows[0])
        raise InvalidParameterError(
            f"transition row {row} sums to {row_sums[row]!r}, expected 1"
        )
    return array
