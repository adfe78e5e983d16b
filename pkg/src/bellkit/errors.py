"""Exception hierarchy shared by every bellkit module."""


class BellkitError(Exception):
    """Base class for all bellkit failures."""


class InvalidInputError(BellkitError, ValueError):
    """Malformed input: wrong shapes, mismatched dimensions, bad JSON."""


class NotHermitianError(InvalidInputError):
    pass


class NotProjectorError(InvalidInputError):
    pass


class ResourceError(BellkitError):
    """A configured size cap would be exceeded."""


class DegenerateProbabilityError(BellkitError):
    """A stochastic filter succeeds with probability below tolerance."""


class ClassificationError(BellkitError):
    """Block classification in the projector-pair decomposition is ambiguous."""


class NoSaturatingPointError(BellkitError):
    pass


class BranchNotViolatingError(BellkitError):
    pass


class NoCertificateError(BellkitError):
    """Raised when a score does not exceed the local bound."""
