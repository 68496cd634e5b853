"""Exception types shared across the package."""


class CofeError(Exception):
    """Base class for all package errors."""


class ModelError(CofeError):
    """A model, parfactor or MLN violates a structural invariant."""


class ParseError(CofeError):
    """A text input could not be parsed; the message carries a line number."""


class TooLargeError(CofeError):
    """An exact computation would exceed its configured size cap."""


class ZeroEvidenceError(CofeError):
    """A query conditions on evidence whose probability is zero."""
