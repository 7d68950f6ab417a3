"""
Custom exceptions for task loading, expression evaluation and reporting.
"""


class PlanForgeError(Exception):
    """Base exception class for planforge errors."""
    pass


class ModelError(PlanForgeError):
    """Raised when a task model cannot be built or evaluated."""
    pass


class UnknownDomain(ModelError):
    """Raised when an instance names a domain that is not registered."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"Unknown domain: {name!r}")


class SchemaViolation(ModelError):
    """Raised when an instance document does not match the instance schema."""

    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"Schema violation at {path or '<root>'}: {reason}")


class UnboundVariable(ModelError):
    """Raised when an expression or condition names an unknown fluent."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"Unbound variable: {name!r}")


class DivisionByZero(ModelError):
    """Raised when a Div node meets a zero divisor."""
    pass


class Inapplicable(ModelError):
    """Raised when an action cannot be applied in a state."""
    pass


class ReportError(PlanForgeError):
    """Raised when a coverage report cannot be produced."""
    pass


class EmptyReport(ReportError):
    """Raised when report() receives no run records."""
    pass


class IoError(ReportError):
    """Raised when a report file cannot be written."""
    pass
