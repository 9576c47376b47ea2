class DimensionMismatchError(ValueError):
    """Exception for operands whose shapes do not fit together."""

    def __init__(self, operation: str, expected: int, actual: int):
        super().__init__(f"{operation}: expected dimension {expected}, got {actual}")
        self.expected = expected
        self.actual = actual


class ArgumentError(ValueError):
    """Exception for arguments outside of their documented range."""

    pass


class NonFiniteError(ValueError):
    """Exception for NaN or Inf entries offered to a constructor."""

    def __init__(self, what: str):
        super().__init__(f"{what} contains NaN or Inf entries")


class NotPositiveDefiniteError(ArithmeticError):
    """Exception for matrices or linear maps that turned out not to be positive definite."""

    def __init__(self, message: str, pivot: int | None = None, iteration: int | None = None):
        super().__init__(message)
        self.pivot = pivot
        self.iteration = iteration


class CapabilityError(RuntimeError):
    """Exception for optional capabilities that are unavailable for a given instance."""

    pass


class TraceClosedError(RuntimeError):
    """Exception for records appended to a trace that already has a terminal status."""

    def __init__(self, status: str):
        super().__init__(f"trace is already closed with status '{status}'")
        self.status = status
