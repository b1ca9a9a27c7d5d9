"""Exception hierarchy shared by every module of the package."""


class DCEError(Exception):
    """Base class for all package errors."""


class DimensionalityError(DCEError, ValueError):
    """A mode index does not match the dimensionality of the cavity."""


class ResonanceAmbiguityError(DCEError):
    """More than one partner mode matches a drive frequency."""


class DegenerateResonanceError(DCEError, ValueError):
    """Two-mode solution requested for coincident frequencies."""


class SeriesRangeError(DCEError, ValueError):
    """Series argument outside the supported convergence region."""


class SeriesConvergenceError(DCEError, ArithmeticError):
    """A series did not converge within its iteration budget."""


class SymplecticDefectError(DCEError, ArithmeticError):
    """A transform violates the Bogoliubov row identity beyond tolerance."""


class InvalidCovarianceError(DCEError, ValueError):
    """A covariance matrix violates the uncertainty relation."""


class UnknownModeError(DCEError, KeyError):
    """A mode label is not present in a state basis."""


class ConfigError(DCEError, ValueError):
    """Invalid run configuration; ``problems`` lists every offending field."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class NumericalError(DCEError, ArithmeticError):
    """Numerical failure inside a scenario run, with sample context."""
