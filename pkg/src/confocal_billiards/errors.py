"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes, so keep the taxonomy small:
bad arguments, bad domains, and internal bookkeeping failures.
"""


class BilliardError(Exception):
    """Base class for all package errors."""


class InvalidInputError(BilliardError):
    """An argument violates a precondition (zero velocity, lambda > a, ...)."""


class DomainError(BilliardError):
    """The requested operation is undefined for this domain or parameter
    (non-homogeneous input to a partition, critical lambda where a regular
    one is required, epsilon too large, ...)."""


class IntegrityError(BilliardError):
    """Internal consistency check failed: a rule table produced a label
    mismatch, a trajectory escaped the domain, a gluing is non-orientable.
    These indicate a bug, never bad user input."""
