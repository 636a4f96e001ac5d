"""Exception types shared across the simulator."""

from __future__ import annotations


class SimulationError(Exception):
    """Base class for solver and pipeline failures."""


class ConfigError(SimulationError):
    """Invalid or inconsistent run configuration."""


class NonConvergence(SimulationError):
    """Newton iteration failed to reach the residual tolerance.

    Carries the offending detuning, the last iterate and its residual
    norm so sweep drivers can report where a scan broke down.
    """

    def __init__(self, message: str, *, delta=None, iterate=None, residual=None):
        super().__init__(message)
        self.delta = delta
        self.iterate = iterate
        self.residual = residual


class AboveThresholdUnstableSeedless(SimulationError):
    """Seedless solve at zero detuning with the pump at or above threshold.

    The trivial (dark) subharmonic state is unstable there and no stable
    stationary solution exists below the oscillation branch, which this
    simulator does not model.
    """


class MultiStability(SimulationError):
    """Cold- and warm-started solves disagree: coexisting steady states."""

    def __init__(self, message: str, *, delta=None, cold=None, warm=None):
        super().__init__(message)
        self.delta = delta
        self.cold = cold
        self.warm = warm


class SingularResponse(SimulationError):
    """Sideband response matrix is singular (threshold-degenerate point)."""


class FeatureAbsent(SimulationError):
    """Requested spectral feature does not exist in the table."""


class PeakNotFound(SimulationError):
    """No usable resonance peak in a scan direction."""
