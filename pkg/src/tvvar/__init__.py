"""Time-varying sparse VAR estimation.

Estimates the sequence of transition matrices of a locally stationary
VAR(1) process by kernel smoothing the lagged covariances and solving,
at each time point, d independent l1-minimization sub-problems recast
as linear programs.  Ships the simulation designs, baseline estimators
(stationary VAR, time-varying lasso/ridge/MLE), support-recovery
metrics, ROC sweeps and one-step-ahead prediction tuning used to
benchmark the method.
"""

from tvvar.exceptions import (
    ConfigError,
    DataError,
    EmptyKernelWindowError,
    InfeasibleSubproblemError,
    NotPositiveSemidefiniteError,
    SingularMatrixError,
    TvvarError,
    ZeroVarianceError,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DataError",
    "EmptyKernelWindowError",
    "InfeasibleSubproblemError",
    "NotPositiveSemidefiniteError",
    "SingularMatrixError",
    "TvvarError",
    "ZeroVarianceError",
    "__version__",
]
