"""Exception types shared across the package."""


class TvvarError(Exception):
    """Base class for all package errors."""


class SingularMatrixError(TvvarError):
    """A pivot fell below the singularity cutoff during elimination."""


class NotPositiveSemidefiniteError(TvvarError):
    """A matrix required to be PSD failed the eigenvalue check."""


class EmptyKernelWindowError(TvvarError):
    """No grid point falls inside the kernel bandwidth window."""


class InfeasibleSubproblemError(TvvarError):
    """An l1 sub-problem has an empty feasible set (tau too small).

    Carries the row index and evaluation time so callers can report
    which sub-problem failed.
    """

    def __init__(self, row, t, message=None):
        self.row = row
        self.t = t
        super().__init__(
            message or f"infeasible sub-problem for row {row} at t={t}"
        )


class ZeroVarianceError(TvvarError):
    """A variable with (near) zero variance cannot be standardized."""


class ConfigError(TvvarError):
    """Invalid configuration value or combination."""


class DataError(TvvarError):
    """Missing or malformed input data."""
