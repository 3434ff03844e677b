"""Exception types shared across the package."""


class EncAQCError(Exception):
    """Base class for all package errors."""


class DimensionError(EncAQCError, ValueError):
    """Operands act on different numbers of qubits."""


class CapacityError(EncAQCError, ValueError):
    """A dense or enumerative operation exceeds its configured size limit."""


class CodeValidationError(EncAQCError, ValueError):
    """A stabilizer code or error set violates one of its invariants."""


class PreconditionError(EncAQCError, ValueError):
    """An operation was called outside its documented precondition."""


class ModelValidationError(EncAQCError, ValueError):
    """A Hamiltonian term or schedule is inconsistent with the code."""


class UndefinedBoundError(EncAQCError, ValueError):
    """The correction timescale is undefined (no errors supplied)."""


class SingularityError(EncAQCError, ValueError):
    """A bath parameter sits on a Matsubara resonance."""

    def __init__(self, message, kappa=None):
        super().__init__(message)
        self.kappa = kappa


class QuadratureError(EncAQCError, RuntimeError):
    """Adaptive quadrature failed to reach its error target."""

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class IntegratorError(EncAQCError, RuntimeError):
    """A time step violated a conservation tolerance."""


class ConfigError(EncAQCError, ValueError):
    """Invalid scenario configuration; ``path`` names the offending key."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class DomainError(EncAQCError, ValueError):
    """An argument lies outside the operation's domain (e.g. tau > t)."""
