"""Exception types raised by the toolkit.

Numerical guards derive from :class:`NumericalGuardError` so the command line
front end can map them onto exit code 2.
"""


class DscatterError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(DscatterError, ValueError):
    """Malformed potential or run configuration."""


class DomainTooSmall(ConfigError):
    pass


class GridMismatch(ConfigError):
    pass


class NumericalGuardError(DscatterError, ArithmeticError):
    """A computation left its range of validity."""


class IntegrationDiverged(NumericalGuardError):
    pass


class NonConvergence(NumericalGuardError):
    pass


class ZeroWronskian(NumericalGuardError):
    pass


class NotExceptional(NumericalGuardError):
    pass


class TruncationViolation(NumericalGuardError):
    pass


class RescaleOutOfRange(NumericalGuardError):
    pass


class ParityMismatch(NumericalGuardError):
    pass


class MassDrift(NumericalGuardError):
    pass


class BlowupGuard(NumericalGuardError):
    pass


class StepRejected(NumericalGuardError):
    pass


class NotConverged(NumericalGuardError):
    pass


class UnitarityDefect(NumericalGuardError):
    pass


class AliasWarning(RuntimeWarning):
    """Evolved field is reaching the edge of the computational box."""
