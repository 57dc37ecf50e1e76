"""Tests for custom exceptions."""

from commuting_pairs.exceptions import (
    ConfigurationError,
    ConvergenceError,
    DegenerateGapError,
    PreconditionError,
    RoundingError,
    SerializationError,
    TailTooLargeError,
    ValidationError,
)


class TestValidationError:
    """Test ValidationError exception."""

    def test_validation_error_basic(self):
        """Test basic ValidationError creation."""
        error = ValidationError("Test error")
        assert str(error) == "Test error"
        assert error.message == "Test error"
        assert error.field is None
        assert error.value is None
        assert error.errors == []

    def test_validation_error_with_field_and_value(self):
        """Test ValidationError with field and value."""
        error = ValidationError("not Hermitian", field="matrix", value="1e-3 > 1e-9")
        assert str(error) == "Field 'matrix': not Hermitian (Value: 1e-3 > 1e-9)"

    def test_validation_error_with_errors(self):
        """Test ValidationError with a list of errors."""
        error = ValidationError("invalid event", errors=["cells 0 and 1 overlap", "incomplete"])
        assert "Errors: cells 0 and 1 overlap, incomplete" in str(error)


class TestConvergenceError:
    """Test ConvergenceError exception."""

    def test_convergence_error_details(self):
        """Test that rotations and off-diagonal norm are rendered."""
        error = ConvergenceError("no convergence", iterations=64, off_diagonal_norm=1.5e-3)
        assert str(error) == "no convergence (Rotations: 64) (Off-diagonal norm: 1.500e-03)"
        assert error.iterations == 64

    def test_convergence_error_basic(self):
        """Test ConvergenceError without details."""
        assert str(ConvergenceError("stuck")) == "stuck"


class TestPreconditionError:
    """Test PreconditionError and its subclasses."""

    def test_precondition_error_with_operation_and_values(self):
        """Test operation prefix and value listing."""
        error = PreconditionError(
            "too far from idempotent",
            operation="round_to_projection",
            values={"defect": 0.25, "k": 1},
        )
        assert str(error) == "[round_to_projection] too far from idempotent (defect=0.25, k=1)"
        assert error.values == {"defect": 0.25, "k": 1}

    def test_precondition_error_defaults(self):
        """Test PreconditionError defaults."""
        error = PreconditionError("bad input")
        assert error.operation is None
        assert error.values == {}
        assert str(error) == "bad input"

    def test_subclasses(self):
        """Test that the specific failures are precondition errors."""
        for cls in (DegenerateGapError, TailTooLargeError, RoundingError):
            error = cls("failure", operation="op")
            assert isinstance(error, PreconditionError)
            assert str(error) == "[op] failure"


class TestConfigurationError:
    """Test ConfigurationError exception."""

    def test_configuration_error_basic(self):
        """Test basic ConfigurationError creation."""
        error = ConfigurationError("Test error")
        assert str(error) == "Test error"
        assert error.setting is None

    def test_configuration_error_with_setting(self):
        """Test ConfigurationError with setting and value."""
        error = ConfigurationError("must be positive", setting="workers", value=0)
        assert str(error) == "Setting 'workers': must be positive (Value: 0)"


class TestSerializationError:
    """Test SerializationError exception."""

    def test_serialization_error_full(self):
        """Test every context field in the message."""
        original = ValueError("Expecting value")
        error = SerializationError(
            "invalid JSON", file_path="x.json", field="$.re", line=3, original_error=original
        )
        assert str(error) == (
            "File 'x.json': invalid JSON (Line: 3) (Field: $.re) (Original: Expecting value)"
        )
        assert error.original_error is original

    def test_serialization_error_basic(self):
        """Test SerializationError without context."""
        error = SerializationError("bad file")
        assert str(error) == "bad file"
        assert error.line is None
