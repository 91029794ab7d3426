"""Exception types raised by the solver modules."""


class SolverError(Exception):
    """Base class for all solver-specific failures."""


class PositivityViolation(SolverError):
    """Strain-energy positivity or a basic parameter bound is violated.

    The message names the offending condition.
    """


class DegenerateBasis(SolverError):
    """The exponential solution basis is invalid (clustered or vanishing
    characteristic roots) and the caller requested strict handling."""


class InsufficientBracket(SolverError):
    """The eigenvalue scan found fewer sign changes than requested."""


class NotAnEigenvalue(SolverError):
    """The boundary matrix is not rank-deficient at the supplied value."""


class WeightsUnresolvable(SolverError):
    """No member of the candidate weight family makes the probe
    eigenfunctions mutually orthogonal."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class SpectrumExhausted(SolverError):
    """The available spectrum is too short to reach the requested
    truncation target."""


class CriticalPrestress(SolverError):
    """The prestress sits at the stability threshold while a nonzero load
    increment is applied: the stationary problem has no solution."""


class UndeterminedConstant(SolverError):
    """Threshold prestress with zero load: the stationary solution is a
    family of constants."""


class StabilityError(SolverError):
    """The prestress exceeds the stability threshold; the time series
    blows up and solving is refused without an explicit override."""


class MismatchedParams(SolverError):
    """Two solutions being compared were built from different moduli."""


class NoSignChange(SolverError):
    """A bisection bracket does not straddle a sign change."""


class ConfigError(SolverError):
    """A run configuration file is missing, malformed, or inconsistent."""
