"""Exception hierarchy shared by every module of the package."""


class AlmError(Exception):
    """Base class for all errors raised by alm_means."""


class EigenFailure(AlmError):
    """The symmetric eigensolver did not converge."""


class DomainError(AlmError, ValueError):
    """A function was applied outside its domain (e.g. log of a singular matrix)."""


class ParameterError(AlmError, ValueError):
    pass


class SingularInput(AlmError, ValueError):
    """The first argument of a mean is singular and no regularization was requested."""


class Unsupported(AlmError):
    pass


class InconsistentMean(AlmError, ValueError):
    """Declared weight of a mean disagrees with its numerical derivative at 1."""


class NotAffinelyDominated(AlmError, ValueError):
    pass


class NonPrimitive(AlmError, ValueError):
    pass


class DegeneratePerron(AlmError, ValueError):
    """The eigenvalue-1 eigenspace of a stochastic matrix is not one-dimensional."""


class InvalidTriple(AlmError, ValueError):
    pass


class HypothesisViolation(AlmError, ValueError):
    """The means do not satisfy the convergence hypotheses.

    Attributes
    ----------
    indices : tuple of int
        Positions of the means responsible for the violation.
    """

    def __init__(self, message, indices=()):
        super().__init__(message)
        self.indices = tuple(indices)


class NonConverged(AlmError):
    """Iteration cap reached before the stopping tolerance.

    The partial :class:`~alm_means.alm.AlmOutcome` is kept on ``outcome``.
    """

    def __init__(self, message, outcome=None):
        super().__init__(message)
        self.outcome = outcome


class WeightEstimationFailure(AlmError):
    pass


class PreconditionError(AlmError, ValueError):
    pass


class UnknownCheck(AlmError, KeyError):
    pass


class JobError(AlmError, ValueError):
    """Malformed job file or matrix input."""
