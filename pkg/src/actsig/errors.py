"""Exception hierarchy.

The CLI maps these onto exit codes: argument-type errors exit 2,
property failures exit 3 and convergence failures exit 4.
"""


class ActsigError(Exception):
    """Base class for all errors raised by the package."""


class ArgumentError(ActsigError, ValueError):
    """An input is outside the documented domain."""


class RegistryError(ArgumentError, KeyError):
    """Unknown activation identifier."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class EvaluationError(ActsigError, ArithmeticError):
    """An integrand produced a non-finite value."""


class ConvergenceError(ActsigError):
    """An iterative or adaptive procedure did not converge."""

    def __init__(self, message, last_panel=None):
        super().__init__(message)
        self.last_panel = last_panel


class CapabilityError(ActsigError):
    """The activation lacks the metadata or evaluator required."""


class DomainError(ActsigError, ValueError):
    """Quantity undefined for this activation (e.g. infinite slopes)."""


class MetadataError(ActsigError):
    """Activation metadata is missing or inconsistent."""


class SignatureError(ActsigError):
    """A signature component failed or violated an invariant."""

    def __init__(self, message, component=None):
        super().__init__(message)
        self.component = component


class PropertyFailure(ActsigError):
    """A certified property did not hold."""
