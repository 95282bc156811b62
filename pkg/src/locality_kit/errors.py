"""Shared exception types."""


class LocalityKitError(Exception):
    """Base class for all package errors."""


class SizeBoundError(LocalityKitError):
    """An enumeration would exceed its configured size bound."""


class DomainError(LocalityKitError):
    """A word (or conjugation) is outside the partial product's domain."""


class NormalityError(LocalityKitError):
    """An operation required a partial normal subgroup and got something else."""


class ObjectSetError(LocalityKitError):
    """An object set fails a closure precondition (with a witness attached)."""


class PreconditionError(LocalityKitError):
    """A stated operation precondition does not hold."""


class CertificationError(LocalityKitError):
    """Post-hoc certification of a constructed structure failed."""


class TheoremViolation(LocalityKitError):
    """An exhaustive search contradicted a guaranteed existence statement.

    Raising this indicates an implementation bug, not a mathematical event.
    """
