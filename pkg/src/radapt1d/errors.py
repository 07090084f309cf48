"""Exception and warning types shared across the package."""


class Radapt1dError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(Radapt1dError, ValueError):
    """A constructor or operation received an out-of-contract argument."""


class InvalidIntegrandError(InvalidParameterError):
    """An integrand violated a sign or admissibility requirement."""


class InvalidComparisonError(InvalidParameterError):
    """Two objects that must be structurally compatible are not."""


class OutOfDomainError(Radapt1dError, ValueError):
    """Evaluation was requested outside the function's domain."""


class NumericError(Radapt1dError, ArithmeticError):
    """A numerical operation produced a non-finite or unstable result.

    When the failure is localized, ``where`` carries the offending point.
    """

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class InadmissibleFunctionError(Radapt1dError):
    """A trial function violates the boundary conditions of the admissible
    class; the renormalized energy is +infinity there."""


class InfeasibleStateError(Radapt1dError):
    """An optimization state violates the mesh invariants (non-monotone or
    degenerate node positions); the discrete energy is +infinity there."""


class NotAvailableError(Radapt1dError, LookupError):
    """The requested closed form or catalog entry does not exist."""


class Radapt1dWarning(UserWarning):
    """Base class for all package warnings."""


class DerivativeFallbackWarning(Radapt1dWarning):
    """An analytic derivative was missing and a finite-difference fallback
    was used instead."""


class DegenerateDensityWarning(Radapt1dWarning):
    """The mesh density integrates to zero; a uniform mesh is returned."""


class MeshResolutionWarning(Radapt1dWarning):
    """Node placement required snapping beyond the expected amount, or a
    tabulation failed to reach its self-consistency target."""


class UndefinedRelativeErrorWarning(Radapt1dWarning):
    """A relative error was requested against a zero reference; the absolute
    error is returned instead."""
