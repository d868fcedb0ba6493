"""
Custom error classes

Every error carries a stable code, an optional suggestion for the user and the
process exit status the CLI should use when it escapes a command.
"""

from typing import Optional, Sequence


class IsoLabError(Exception):
    """Base class for iso-lab errors"""

    exit_code = 2

    def __init__(self, message: str, code: str = "ISO_LAB_ERROR", suggestion: Optional[str] = None):
        super().__init__(message)
        self.code = code
        self.message = message
        self.suggestion = suggestion

    def to_dict(self) -> dict:
        """Convert to a JSON-friendly dict"""
        error_dict = {
            "code": self.code,
            "message": self.message
        }
        if self.suggestion:
            error_dict["suggestion"] = self.suggestion
        return error_dict


class InvalidParameterError(IsoLabError):
    """Invalid argument passed to a library operation"""

    exit_code = 1

    def __init__(self, message: str, suggestion: Optional[str] = None):
        super().__init__(
            message=message,
            code="INVALID_PARAMETER",
            suggestion=suggestion
        )


class ConfigurationError(IsoLabError):
    """Run configuration is invalid"""

    exit_code = 1

    def __init__(self, message: str, suggestion: Optional[str] = None):
        super().__init__(
            message=message,
            code="CONFIGURATION_ERROR",
            suggestion=suggestion or "Check the run configuration against docs/CONFIG_SCHEMA.md"
        )


class FileParseError(IsoLabError):
    """A structured text file could not be parsed"""

    exit_code = 1

    def __init__(self, file_path: str, reason: str):
        super().__init__(
            message=f"Failed to parse {file_path}: {reason}",
            code="FILE_PARSE_ERROR",
            suggestion="Check that the file is a valid YAML document"
        )
        self.file_path = file_path


class AssumptionViolationError(IsoLabError):
    """A game violates the bounded-cost assumption |<phi^j(a), z>| <= 1"""

    exit_code = 1

    def __init__(self, player: int, joint_action: Sequence[int], context: int, value: float):
        self.player = player
        self.joint_action = tuple(int(a) for a in joint_action)
        self.context = context
        self.value = value
        super().__init__(
            message=(
                f"|<phi^{player}(a={self.joint_action}), z_{context}>| = {abs(value):.6g} exceeds 1 "
                f"(entry features[{player}] at joint action {self.joint_action}, contexts[{context}])"
            ),
            code="ASSUMPTION_VIOLATION",
            suggestion="Rescale the features or context vectors so every cost lies in [-1, 1]"
        )

    def to_dict(self) -> dict:
        error_dict = super().to_dict()
        error_dict["entry"] = {
            "player": self.player,
            "joint_action": list(self.joint_action),
            "context": self.context,
            "value": self.value,
        }
        return error_dict


class LimitExceededError(IsoLabError):
    """Input is larger than the brute-force oracle accepts"""

    def __init__(self, message: str):
        super().__init__(
            message=message,
            code="LIMIT_EXCEEDED",
            suggestion="Use a smaller instance or raise the oracle limits in Settings"
        )


class TraceError(IsoLabError):
    """Trace is partial or inconsistent with the game"""

    def __init__(self, message: str, suggestion: Optional[str] = None):
        super().__init__(
            message=message,
            code="TRACE_ERROR",
            suggestion=suggestion
        )


class LedgerConflictError(IsoLabError):
    """A (round, player) cell of the mistake ledger was written twice"""

    def __init__(self, round_index: int, player: int):
        super().__init__(
            message=f"Mistake ledger cell (round={round_index}, player={player}) already written",
            code="LEDGER_CONFLICT"
        )


class BoundViolationError(IsoLabError):
    """A runtime audit inequality failed"""

    def __init__(self, message: str):
        super().__init__(
            message=message,
            code="BOUND_VIOLATION",
            suggestion="Inspect the trace CSV of the failing run"
        )
