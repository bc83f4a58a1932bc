"""Exception hierarchy for rigidnet."""


class RigidnetError(Exception):
    """Base class for all rigidnet errors."""


class EconomyError(RigidnetError):
    """Invalid economy description."""


class ColumnSumViolation(EconomyError):
    """Technology column sums plus labor shares do not add up to one."""


class PreferenceSumViolation(EconomyError):
    """Consumer preference weights do not sum to one."""


class SpectralRadiusNotSubunit(EconomyError):
    """Spectral radius of the technology matrix is not strictly below one."""


class NegativeEntry(EconomyError):
    """Negative entry where a nonnegative one is required."""


class LeverageOutOfRange(EconomyError):
    """Leverage fraction outside [0, 1]."""


class DimensionMismatch(RigidnetError):
    """Array shapes inconsistent with the economy size."""


class SingularSystem(RigidnetError):
    """Linear system unexpectedly singular."""


class ShockModelError(RigidnetError):
    """Invalid shock or signal description."""


class EmptyCell(RigidnetError):
    """Signal cell with (numerically) zero probability mass."""


class UnsupportedAnalytic(RigidnetError):
    """Requested expectation is outside the analytic backend's closed-form family."""


class UnsupportedShock(RigidnetError):
    """Operation requires a single-node shock model."""


class BracketFailure(RigidnetError):
    """Root bracket for the cost-of-debt equation could not be established."""


class ConvergenceFailure(RigidnetError):
    """Iterative solver failed to converge."""


class InconsistentProfile(RigidnetError):
    """Debt profile inconsistent with the economy passed alongside it."""


class InvalidAlpha(RigidnetError):
    """Chain/cycle weight outside the open unit interval."""


class UnknownTable(RigidnetError):
    """Unknown reference table identifier."""


class UsageError(RigidnetError):
    """Malformed command line or input document."""
