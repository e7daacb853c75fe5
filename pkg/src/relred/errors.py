"""Exception hierarchy shared by all relred modules.

The CLI maps these onto exit-code categories, so new exceptions should
subclass one of the four category roots below.
"""


class RelredError(Exception):
    """Base class for all library errors."""


class ParseError(RelredError):
    """Malformed textual input (relation files, formula text, certificates)."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class PreconditionError(RelredError):
    """An operation was called with arguments violating its contract."""


class AttributeSchemeError(PreconditionError):
    """Attribute not in scheme, duplicate attribute, or bad partition/cover."""


class DomainMismatchError(PreconditionError):
    """Operands live over different domains."""


class SchemeCollisionError(PreconditionError):
    """Cartesian product requested on overlapping schemes."""


class BondabilityError(PreconditionError):
    """Some attribute occurs in three or more factor schemes."""


class ReductionRefused(PreconditionError):
    """A reducer declined to produce a certificate.

    Carries a machine-readable ``reason`` code plus free-form ``details``
    (violated inequality, dependency witness, ...).
    """

    def __init__(self, reason: str, message: str, **details):
        self.reason = reason
        self.details = details
        super().__init__(message)


class CapExceededError(RelredError):
    """An enumeration or search would exceed the configured caps."""


class VerificationError(RelredError):
    """A certificate does not evaluate to its claimed target."""
