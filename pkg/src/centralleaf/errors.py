"""Exception taxonomy shared by all modules.

Exit-code mapping used by the CLI: validation errors exit 1, internal
consistency failures exit 2, budget/precision exhaustion exit 3.
"""


class CentralLeafError(Exception):
    """Base class for all library errors."""


class ConfigurationError(CentralLeafError):
    """Invalid construction data (bad group tag, malformed datum, bad spec)."""


class PreconditionError(CentralLeafError):
    """An operation was called with input violating its contract."""


class DatumMismatchError(CentralLeafError, TypeError):
    """Operands belong to different root data or coefficient rings."""


class UnsupportedOperationError(CentralLeafError):
    """The datum lacks the structure the operation needs (e.g. no faithful rep)."""


class SingularInputError(CentralLeafError):
    """A matrix that must be invertible is singular."""


class ConsistencyError(CentralLeafError):
    """An internal cross-check failed; indicates an implementation bug."""


class BudgetExceededError(CentralLeafError):
    """An enumeration exceeded its configured budget.

    ``partial`` carries whatever certified partial result was computed
    before the abort (possibly None).
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class InconclusiveError(CentralLeafError):
    """p-adic precision was exhausted before a certified answer was reached."""


class NotPDivisibleError(CentralLeafError):
    """The slope data is outside the p-divisible-group window [-1, 0]."""
