"""Exception types shared across the package."""


class RdcsimError(Exception):
    """Base class for all rdcsim errors."""


class ConfigError(RdcsimError):
    """Raised when a profile config file cannot be parsed."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class ValidationError(RdcsimError):
    """Raised when a value violates a declared invariant."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class CounterOverflowError(RdcsimError):
    """Raised when a count exceeds the configured counter width."""

    def __init__(self, count: int, width_bits: int, required_bits: int):
        self.count = count
        self.width_bits = width_bits
        self.required_bits = required_bits
        super().__init__(
            f"count {count} overflows a {width_bits}-bit counter "
            f"(needs {required_bits} bits)"
        )


class CalibrationError(RdcsimError):
    """Raised when a calibration fit or update cannot be performed."""


class RangeError(RdcsimError):
    """Raised when a query falls outside a curve's valid range."""
