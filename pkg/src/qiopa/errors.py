"""Exception types shared across the package.

The CLI maps these onto process exit codes, so anything that should
abort a command with a specific code must raise one of these.
"""


class QiopaError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(QiopaError):
    """Invalid, unknown, or out-of-range configuration input."""


class TruncationError(QiopaError):
    """A photon-number series could not be truncated to the requested
    tail mass within the configured maximum index."""

    def __init__(self, message, achieved_bound=None):
        super().__init__(message)
        self.achieved_bound = achieved_bound


class CutoffError(QiopaError):
    """Truncated-Fock evolution leaked more norm than tolerated; the
    per-mode cutoff is too small for the requested gain."""

    def __init__(self, message, norm_leak=None):
        super().__init__(message)
        self.norm_leak = norm_leak


class FitError(QiopaError):
    """Fringe fitting failed (degenerate phase grid or unusable data)."""


class InsufficientDataError(QiopaError):
    """Too few shots survived to carry out the requested analysis."""
