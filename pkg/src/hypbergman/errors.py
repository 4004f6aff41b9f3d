"""Exception types raised by the library and mapped to CLI exit codes."""


class ValidationError(ValueError):
    """Bad input: malformed point, matrix, config or weight."""


class InvalidWeight(ValidationError):
    pass


class MissingIdentity(ValidationError):
    pass


class DimensionError(ValidationError):
    pass


class DegenerateKernel(ArithmeticError):
    pass


class BudgetExceeded(RuntimeError):
    """Enumeration produced more elements than the configured cap."""
