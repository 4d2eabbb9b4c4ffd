"""Exception hierarchy.

Everything derives from :class:`SatStreamError` (itself a ``ValueError``) so
callers can catch one type at the CLI boundary.
"""


class SatStreamError(ValueError):
    pass


class ParseError(SatStreamError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class VarOutOfRange(SatStreamError):
    pass


class EmptyClause(SatStreamError):
    pass


class ContradictoryConjunction(SatStreamError):
    pass


class ClauseTooLarge(SatStreamError):
    pass


class IndexOutOfRange(SatStreamError):
    pass


class DuplicateInsert(SatStreamError):
    pass


class SpaceBudgetExceeded(SatStreamError):
    pass


class TooManyVariables(SatStreamError):
    pass


class NumericalFailure(SatStreamError):
    pass


class SeedMismatch(SatStreamError):
    pass


class AllInstancesTerminated(SatStreamError):
    pass


class FrequencyBoundViolated(SatStreamError):
    pass


class KTooLarge(SatStreamError):
    pass


class DimensionMismatch(SatStreamError):
    pass


class InstanceTooLarge(SatStreamError):
    pass


class ConfigError(SatStreamError):
    pass


class OracleGuardViolated(SatStreamError):
    pass
