"""Coupled-mode equations of motion and input-output relations.

Single source of truth for the dynamics.  In the frame rotating with the
drives, with a the subharmonic and b the pump amplitude,

    da/dt = -(gamma   + i delta_a) a + kappa b conj(a)   + F_a
    db/dt = -(gamma_b + i delta_b) b - (kappa / 2) a^2   + F_b

where F_a = sqrt(2 gamma_in) seed_amp is real, F_b = sqrt(2 gamma_b_in)
b_in carries the pump phase theta, and a cavity-length scan couples the
detunings as delta_b = detune_ratio * delta_a unless delta_b is given
explicitly.  The steady-state solver, the stability analysis, the sideband
response and the time integrator all build on the functions here.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .params import FieldState, ModelParams, threshold_drive


def pump_input_amplitude(params: ModelParams) -> complex:
    """Complex pump input b_in for the configured pump_ratio and theta."""
    if params.pump_ratio == 0.0:
        return 0.0 + 0.0j
    mag = math.sqrt(params.pump_ratio) * threshold_drive(params)
    return mag * cmath.exp(1j * params.theta)


def drive_terms(params: ModelParams) -> tuple[float, complex]:
    """Drive terms (F_a, F_b) appearing in the equations of motion.

    F_b = sqrt(pump_ratio) * gamma * gamma_b / kappa * e^{i theta}; the
    input-coupler rate cancels against the threshold normalization.
    """
    f_a = math.sqrt(2.0 * params.gamma_in) * params.seed_amp
    if params.pump_ratio == 0.0:
        return f_a, 0.0 + 0.0j
    f_b = (math.sqrt(params.pump_ratio) * params.gamma * params.gamma_b / params.kappa
           * cmath.exp(1j * params.theta))
    return f_a, f_b


def resolve_delta_b(params: ModelParams, delta: float, delta_b: float | None) -> float:
    return params.detune_ratio * delta if delta_b is None else delta_b


def equations_of_motion(params: ModelParams, state, delta: float,
                        delta_b: float | None = None):
    """Time derivatives (da/dt, db/dt) at the given amplitudes and detuning.

    Accepts scalars or numpy arrays for the amplitudes.
    """
    a, b = state
    d_b = resolve_delta_b(params, delta, delta_b)
    f_a, f_b = drive_terms(params)
    da = -(params.gamma + 1j * delta) * a + params.kappa * b * np.conjugate(a) + f_a
    db = -(params.gamma_b + 1j * d_b) * b - 0.5 * params.kappa * a * a + f_b
    return da, db


def _partials(params: ModelParams, a: complex, b: complex, delta: float,
              delta_b: float | None):
    """Complex partial derivatives of the two equations of motion.

    Returns (fa_a, fa_as, fa_b, fb_a, fb_b): derivatives of da/dt with
    respect to a, conj(a), b and of db/dt with respect to a, b.  The
    remaining partials vanish.
    """
    d_b = resolve_delta_b(params, delta, delta_b)
    fa_a = -(params.gamma + 1j * delta)
    fa_as = params.kappa * b
    fa_b = params.kappa * np.conjugate(a)
    fb_a = -params.kappa * a
    fb_b = -(params.gamma_b + 1j * d_b)
    return fa_a, fa_as, fa_b, fb_a, fb_b


def real_jacobian(params: ModelParams, a: complex, b: complex, delta: float,
                  delta_b: float | None = None) -> np.ndarray:
    """4x4 real Jacobian for the state vector (Re a, Im a, Re b, Im b)."""
    fa_a, fa_as, fa_b, fb_a, fb_b = _partials(params, a, b, delta, delta_b)
    dfa = (fa_a + fa_as, 1j * (fa_a - fa_as), fa_b, 1j * fa_b)
    dfb = (fb_a, 1j * fb_a, fb_b, 1j * fb_b)
    return np.array([
        [c.real for c in dfa],
        [c.imag for c in dfa],
        [c.real for c in dfb],
        [c.imag for c in dfb],
    ])


def complex_linearization(params: ModelParams, a: complex, b: complex, delta: float,
                          delta_b: float | None = None) -> np.ndarray:
    """Linearized dynamics in the conjugate basis (da, da*, db, db*)."""
    fa_a, fa_as, fa_b, fb_a, fb_b = _partials(params, a, b, delta, delta_b)
    return np.array([
        [fa_a, fa_as, fa_b, 0.0],
        [np.conjugate(fa_as), np.conjugate(fa_a), 0.0, np.conjugate(fa_b)],
        [fb_a, 0.0, fb_b, 0.0],
        [0.0, np.conjugate(fb_a), 0.0, np.conjugate(fb_b)],
    ], dtype=complex)


def rk4_step(params: ModelParams, state, delta: float, dt: float,
             delta_b: float | None = None):
    """One classical Runge-Kutta step of the coupled equations."""
    a, b = state

    def f(s):
        return equations_of_motion(params, s, delta, delta_b)

    k1a, k1b = f((a, b))
    k2a, k2b = f((a + 0.5 * dt * k1a, b + 0.5 * dt * k1b))
    k3a, k3b = f((a + 0.5 * dt * k2a, b + 0.5 * dt * k2b))
    k4a, k4b = f((a + dt * k3a, b + dt * k3b))
    return (a + dt / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a),
            b + dt / 6.0 * (k1b + 2 * k2b + 2 * k3b + k4b))


# Input-output relations.  The reflected amplitude at a port is
# sqrt(2 gamma_port) * intracavity - input.

def reflected_subharmonic(params: ModelParams, a):
    return math.sqrt(2.0 * params.gamma_in) * a - params.seed_amp


def transmitted_subharmonic(params: ModelParams, a):
    return math.sqrt(2.0 * params.gamma_c) * a


def reflected_pump(params: ModelParams, b):
    return math.sqrt(2.0 * params.gamma_b_in) * b - pump_input_amplitude(params)


def pump_monitor(params: ModelParams, b) -> float:
    """Leakage-port pump signal, proportional to the intracavity power."""
    return 2.0 * params.gamma_b_l * abs(b) ** 2


def parametric_photon_rates(params: ModelParams, state) -> tuple[float, float]:
    """(subharmonic photons gained, pump photons lost) per unit time.

    The parametric interaction creates subharmonic photons in pairs, so
    the first rate is exactly twice the second at any amplitudes.
    """
    a, b = state
    x = params.kappa * (np.conjugate(b) * a * a).real
    return 2.0 * x, x


def energy_flux_residual(params: ModelParams, state) -> float:
    """Relative energy imbalance of a steady state.

    Pump photons carry twice the subharmonic photon energy, so input
    |a_in|^2 + 2 |b_in|^2 must match reflected + transmitted + dissipated
    flux with the same weights.  Exact at a true steady state.
    """
    a, b = state
    a_in = params.seed_amp
    b_in = pump_input_amplitude(params)
    p_in = a_in**2 + 2.0 * abs(b_in) ** 2
    a_out = reflected_subharmonic(params, a)
    b_out = reflected_pump(params, b)
    p_out = abs(a_out) ** 2 + 2.0 * abs(b_out) ** 2
    dissipated = (2.0 * (params.gamma_c + params.gamma_l) * abs(a) ** 2
                  + 4.0 * params.gamma_b_l * abs(b) ** 2)
    return (p_in - p_out - dissipated) / max(p_in, 1e-300)


def state_tuple(state: FieldState) -> tuple[complex, complex]:
    return state.a, state.b
