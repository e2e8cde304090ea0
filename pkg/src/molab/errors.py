"""Exception hierarchy for molab.

Every error raised on purpose by the library derives from :class:`MolabError`
so callers (and the CLI) can separate validation failures from bugs.
"""


class MolabError(Exception):
    """Base class for all library errors."""


class SizeError(MolabError, ValueError):
    """A requested table or array is empty or exceeds the memory bound."""


class RangeError(MolabError, IndexError):
    """An argument lies outside the range covered by a table."""


class DomainError(MolabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PoleError(DomainError):
    """Evaluation at a pole."""


class ConditioningError(DomainError):
    """Evaluation too close to a removable singularity to be trusted."""


class PrecisionError(MolabError, ValueError):
    """The requested accuracy cannot be met in double precision."""


class NonFiniteError(MolabError, ArithmeticError):
    """A computation produced NaN or infinity."""


class NotFoundError(MolabError, LookupError):
    """A search (e.g. for a zero) did not locate anything."""


class ParseError(MolabError, ValueError):
    """Malformed input file; ``line`` is the 1-based line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(MolabError, ValueError):
    """Input that parsed correctly but violates an invariant."""


class UncertifiableError(MolabError, ValueError):
    """No tail certificate or closed form is available."""


class DivergenceError(MolabError, ValueError):
    """A series required to converge does not."""


class MultiplicativityError(MolabError, ValueError):
    """A function cannot be represented as multiplicative."""


class PreconditionError(MolabError, ValueError):
    """An input violates a documented precondition."""
