"""Coupled-mode simulator for a triple-resonant degenerate OPA cavity.

The subharmonic probe and its pump both resonate in the same two-mirror
cavity.  The package solves the nonlinear steady state with pump
depletion, sweeps detuning spectra (reflection, transmission, reflected
phase, intracavity pump), computes the phase-modulation error signal
from the linearized sideband response, and simulates thermally induced
scan asymmetry of the pump transmission.
"""

__version__ = "0.1.0"

from .errors import (AboveThresholdUnstableSeedless, ConfigError, FeatureAbsent,
                     MultiStability, NonConvergence, PeakNotFound,
                     SimulationError, SingularResponse)
from .params import (CavityParams, DecayRates, FieldState, ModelParams,
                     calibrate_kappa, derive_rates, threshold_drive,
                     threshold_power)
from .dynamics import (energy_flux_residual, equations_of_motion,
                       parametric_photon_rates, pump_monitor,
                       reflected_subharmonic, transmitted_subharmonic)
from .steady import (SolveOptions, StabilityReport, classical_gain,
                     clamped_pump_steady, seedless_state, solve_steady,
                     stability, undepleted_steady)
from .pdh import (ModulationSpec, SidebandResponse, lock_slope, pdh_error,
                  pdh_error_far, sideband_response)
from .spectra import (FeatureSet, SpectraTable, SweepSpec, extract_features,
                      linear_phase_slope, linear_reflection, sweep)
from .thermal import (ScanWaveform, ThermalParams, ThermalTrace,
                      asymmetry_metric, ramp_peak_centers, ramp_widths,
                      static_thermal_branch, thermal_scan)

__all__ = [name for name in dir() if not name.startswith("_")]
