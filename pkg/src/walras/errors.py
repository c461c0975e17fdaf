"""Exception types shared across the solver."""


class WalrasError(Exception):
    """Base class for domain failures raised by this package."""


class InstanceFormatError(WalrasError, ValueError):
    """Instance text violates the on-disk schema; the message names the offending field."""


class BudgetExceededError(WalrasError):
    """An enumeration exceeded its configured evaluation budget."""


class ConvexityError(WalrasError):
    """A structural assertion failed, signalling valuations outside the substitutes class."""


class IterationCapError(WalrasError):
    """The descent loop exceeded its iteration cap (bad start point or non-convex oracle)."""


class ContractError(WalrasError):
    """An internal contract between solver components was violated."""
