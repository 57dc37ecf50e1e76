"""Custom exceptions for the commuting-pairs library."""

from typing import Any, Dict, Optional


class ValidationError(Exception):
    """Raised when an input matrix or partition fails validation.

    Attributes:
        message: Error message describing the validation failure
        field: The field or argument that failed validation
        value: The measured value that failed validation
        errors: List of specific validation errors
    """

    def __init__(
        self,
        message: str,
        field: Optional[str] = None,
        value: Optional[Any] = None,
        errors: Optional[list[str]] = None,
    ) -> None:
        super().__init__(message)
        self.message = message
        self.field = field
        self.value = value
        self.errors = errors or []

    def __str__(self) -> str:
        """Return string representation of the validation error."""
        base_msg = self.message
        if self.field:
            base_msg = f"Field '{self.field}': {base_msg}"
        if self.value is not None:
            base_msg = f"{base_msg} (Value: {self.value})"
        if self.errors:
            base_msg = f"{base_msg} Errors: {', '.join(str(e) for e in self.errors)}"
        return base_msg


class ConvergenceError(Exception):
    """Raised when the eigensolver hits its rotation cap.

    Attributes:
        message: Error message describing the failure
        iterations: Number of rotations applied before giving up
        off_diagonal_norm: Frobenius norm of the remaining off-diagonal mass
    """

    def __init__(
        self,
        message: str,
        iterations: Optional[int] = None,
        off_diagonal_norm: Optional[float] = None,
    ) -> None:
        super().__init__(message)
        self.message = message
        self.iterations = iterations
        self.off_diagonal_norm = off_diagonal_norm

    def __str__(self) -> str:
        """Return string representation of the convergence error."""
        base_msg = self.message
        if self.iterations is not None:
            base_msg = f"{base_msg} (Rotations: {self.iterations})"
        if self.off_diagonal_norm is not None:
            base_msg = f"{base_msg} (Off-diagonal norm: {self.off_diagonal_norm:.3e})"
        return base_msg


class PreconditionError(Exception):
    """Raised when an operation is called outside its hypotheses.

    Attributes:
        message: Error message describing the violated precondition
        operation: Name of the operation that rejected its input
        values: Measured quantities involved in the violated inequality
    """

    def __init__(
        self,
        message: str,
        operation: Optional[str] = None,
        values: Optional[Dict[str, Any]] = None,
    ) -> None:
        super().__init__(message)
        self.message = message
        self.operation = operation
        self.values = values or {}

    def __str__(self) -> str:
        """Return string representation of the precondition error."""
        base_msg = self.message
        if self.operation:
            base_msg = f"[{self.operation}] {base_msg}"
        if self.values:
            parts = []
            for key, value in self.values.items():
                if isinstance(value, float):
                    parts.append(f"{key}={value:.6g}")
                else:
                    parts.append(f"{key}={value}")
            base_msg = f"{base_msg} ({', '.join(parts)})"
        return base_msg


class DegenerateGapError(PreconditionError):
    """Raised when a spectral gap is too small for the finite-dimensional pinching bounds."""


class TailTooLargeError(PreconditionError):
    """Raised when the gap binning moves all of the state's weight into the zero bin."""


class RoundingError(PreconditionError):
    """Raised when an almost-projection is too far from idempotent to be rounded."""


class ConfigurationError(Exception):
    """Raised when there's a configuration issue.

    Attributes:
        message: Error message describing the configuration issue
        setting: The configuration setting that caused the error
        value: The invalid value
    """

    def __init__(
        self, message: str, setting: Optional[str] = None, value: Optional[Any] = None
    ) -> None:
        super().__init__(message)
        self.message = message
        self.setting = setting
        self.value = value

    def __str__(self) -> str:
        """Return string representation of the configuration error."""
        base_msg = self.message
        if self.setting:
            base_msg = f"Setting '{self.setting}': {base_msg}"
        if self.value is not None:
            base_msg = f"{base_msg} (Value: {self.value})"
        return base_msg


class SerializationError(Exception):
    """Raised when a matrix, event or certificate file cannot be read.

    Attributes:
        message: Error message describing the failure
        file_path: Path to the file that caused the error
        field: JSON path of the offending field
        line: Line number of a JSON syntax error
        original_error: The original exception that caused this error
    """

    def __init__(
        self,
        message: str,
        file_path: Optional[str] = None,
        field: Optional[str] = None,
        line: Optional[int] = None,
        original_error: Optional[Exception] = None,
    ) -> None:
        super().__init__(message)
        self.message = message
        self.file_path = file_path
        self.field = field
        self.line = line
        self.original_error = original_error

    def __str__(self) -> str:
        """Return string representation of the serialization error."""
        base_msg = self.message
        if self.file_path:
            base_msg = f"File '{self.file_path}': {base_msg}"
        if self.line is not None:
            base_msg = f"{base_msg} (Line: {self.line})"
        if self.field:
            base_msg = f"{base_msg} (Field: {self.field})"
        if self.original_error:
            base_msg = f"{base_msg} (Original: {self.original_error})"
        return base_msg
