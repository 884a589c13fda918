"""Exception hierarchy. Each class carries the CLI exit code for its category."""


class LpaiError(Exception):
    """Base class for all simulator errors."""

    exit_code = 1


class ConfigError(LpaiError):
    """Bad or inconsistent configuration input."""

    exit_code = 2


class InfeasibleRateError(LpaiError):
    """Requested data rate cannot fit the overheads and pulses into one cycle."""

    exit_code = 3


class FitError(LpaiError):
    """Base for estimation failures."""

    exit_code = 4


class RankDeficiencyError(FitError):
    """Fit design matrix does not span the model basis (degenerate input)."""


class FitConvergenceError(FitError):
    """Iterative fit failed to converge within the iteration budget."""


class FitAmbiguityError(FitError):
    """Two fringe-assignment hypotheses fit the data equally well."""


class DataError(LpaiError):
    """Input data unusable for the requested analysis."""

    exit_code = 5


class InsufficientDataError(DataError):
    """Too few points for the requested estimate."""


class DegenerateSignalError(DataError):
    """Detection signal empty (zero total counts); population undefined."""


class DivergenceError(LpaiError):
    """Atom-number map is not a contraction; no equilibrium exists."""

    exit_code = 5
