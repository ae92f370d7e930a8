"""Exception hierarchy shared by every module of the package."""


class ParacontactError(Exception):
    """Base class for all errors raised by this package."""


class JetMismatch(ParacontactError, ValueError):
    """Two jets with different variable counts or truncation orders were combined."""


class DegenerateJet(ParacontactError, ZeroDivisionError):
    """Division by a jet whose constant term vanishes."""


class DomainError(ParacontactError, ValueError):
    """An analytic function was applied outside its real domain."""


class SingularSystem(ParacontactError, ArithmeticError):
    """The constant-term matrix of a jet linear system is singular."""

    def __init__(self, message, condition=float("inf")):
        super().__init__(message)
        self.condition = condition


class OrderExhausted(ParacontactError, ValueError):
    """A derivative was requested from a jet with no remaining order."""


class ArityError(ParacontactError, ValueError):
    """Tensor components do not have the expected number or size of slots."""


class FrameDegenerate(ParacontactError, ArithmeticError):
    """The frame matrix is not invertible at the evaluation point."""


class ChartDomain(ParacontactError, ValueError):
    """The evaluation point lies outside the chart of a structure."""


class ChartDegenerate(ParacontactError, ArithmeticError):
    """No admissible pivot was found while building an adapted frame."""


class NonUniqueConnection(ParacontactError, ArithmeticError):
    """The axiom system for the canonical connection is rank deficient."""


class AxiomInconsistency(ParacontactError, ArithmeticError):
    """The least-norm solution of the axiom system leaves a residual."""

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class ModeError(ParacontactError, ValueError):
    """An operation was requested in a dimension or mode that does not support it."""


class NearSingularSet(ParacontactError, ValueError):
    """A point lies within the guard distance of a singular set."""


class NegativeBase(DomainError):
    """A fractional power of a negative quantity was requested."""
