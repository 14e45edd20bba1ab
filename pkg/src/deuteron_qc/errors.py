"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class ContractViolation(RuntimeError):
    """A caller broke a structural precondition (e.g. undecomposed gates)."""


class NumericError(ArithmeticError):
    """A numerical procedure failed to converge or hit a singular system."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate
