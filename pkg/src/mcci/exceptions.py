"""Exception hierarchy.

Everything raised on purpose by the package derives from :class:`MCCIError`,
and the value-shaped failures also derive from :class:`ValueError` so callers
that already catch ``ValueError`` keep working.
"""


class MCCIError(Exception):
    """Base class for all package errors."""


class InputError(MCCIError, ValueError):
    """Malformed user input (files, labels, array shapes, non-finite values)."""


class PreconditionError(MCCIError, ValueError):
    """A configuration that cannot produce a meaningful result.

    The typical case is a significance level at or below the smallest
    attainable P-value, where no hypothesis can ever be rejected.
    """


class ContractError(MCCIError, ValueError):
    """P-value functions combined or inverted against their declared shape."""


class DegenerateWeightsError(MCCIError, ValueError):
    """Self-normalized weighting with a zero total weight."""


class EmptyConfidenceSetError(PreconditionError):
    """The starting point of a two-sided search is already rejected."""


class TooLargeError(MCCIError, ValueError):
    """Exhaustive enumeration requested beyond the size guard."""
