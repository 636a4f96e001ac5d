"""Phase-modulation sideband response and the demodulated error signal.

The probe input is phase modulated with small depth m, keeping only the
first-order sidebands:

    a_in(t) = a_in [1 + (m/2) e^{i Omega t} - (m/2) e^{-i Omega t}]

The fluctuation vector (p, q*, u, v*) collects the e^{i Omega t}
components of (da, da*, db, db*); it solves the linear system

    (i Omega I - L) X = S,   S = ((m/2) F_a, -(m/2) F_a, 0, 0)

with L the linearization of the equations of motion about the carrier
steady state.  The parametric term couples p to q* through the pump, and
the pump picks up sidebands driven by the carrier subharmonic.  Reflected
outputs follow the usual input-output relation per frequency component.
A derivation note ships in docs/pdh_linear_response.md.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import dynamics
from .errors import SingularResponse
from .params import FieldState, ModelParams

# Demodulation quadrature for which the far-sideband error equals
# -(positive const) * Im[reflected carrier].
DEFAULT_DEMOD_PHASE = -0.5 * math.pi

_COND_LIMIT = 1e12


@dataclass(frozen=True)
class ModulationSpec:
    """Modulation frequency (units of the detuning axis), depth and quadrature."""

    omega: float
    depth: float = 0.2
    demod_phase: float = DEFAULT_DEMOD_PHASE

    def __post_init__(self):
        if self.omega <= 0.0:
            raise ValueError("modulation frequency must be > 0")
        if self.depth <= 0.0:
            raise ValueError("modulation depth must be > 0")
        if self.depth > 0.5:
            warnings.warn("modulation depth > 0.5: second-order sidebands are "
                          "no longer negligible", stacklevel=2)


@dataclass(frozen=True)
class SidebandResponse:
    """Reflected amplitudes at the carrier and the two sidebands.

    a_plus / a_minus are the intracavity sideband amplitudes and
    b_plus / b_minus the pump sidebands (diagnostics).
    """

    a_out_carrier: complex
    a_out_plus: complex
    a_out_minus: complex
    a_plus: complex
    a_minus: complex
    b_plus: complex
    b_minus: complex


def sideband_response(params: ModelParams, state: FieldState, mod: ModulationSpec,
                      *, clamp_pump: bool = False,
                      delta_b: float | None = None) -> SidebandResponse:
    """First-order sideband amplitudes about a converged steady state."""
    if not state.converged:
        raise ValueError("sideband response requires a converged steady state")
    f_a, _ = dynamics.drive_terms(params)
    m2 = 0.5 * mod.depth
    s_plus = m2 * f_a
    delta = state.delta

    if clamp_pump:
        # Pump pinned: 2x2 system in (p, q*) with fixed coupling kappa*b.
        coupling = params.kappa * state.b
        mat = np.array([
            [1j * mod.omega + params.gamma + 1j * delta, -coupling],
            [-np.conjugate(coupling), 1j * mod.omega + params.gamma - 1j * delta],
        ], dtype=complex)
        rhs = np.array([s_plus, -s_plus], dtype=complex)
        sol = _solve_checked(mat, rhs, delta)
        p, q = complex(sol[0]), complex(np.conjugate(sol[1]))
        u = v = 0.0 + 0.0j
    else:
        lin = dynamics.complex_linearization(params, state.a, state.b, delta, delta_b)
        mat = 1j * mod.omega * np.eye(4) - lin
        rhs = np.array([s_plus, -s_plus, 0.0, 0.0], dtype=complex)
        sol = _solve_checked(mat, rhs, delta)
        p, q = complex(sol[0]), complex(np.conjugate(sol[1]))
        u, v = complex(sol[2]), complex(np.conjugate(sol[3]))

    root_in = math.sqrt(2.0 * params.gamma_in)
    a_in = params.seed_amp
    return SidebandResponse(
        a_out_carrier=dynamics.reflected_subharmonic(params, state.a),
        a_out_plus=root_in * p - m2 * a_in,
        a_out_minus=root_in * q + m2 * a_in,
        a_plus=p,
        a_minus=q,
        b_plus=u,
        b_minus=v,
    )


def _solve_checked(mat: np.ndarray, rhs: np.ndarray, delta: float) -> np.ndarray:
    cond = np.linalg.cond(mat)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise SingularResponse(f"sideband response matrix is singular at delta={delta!r} "
                               f"(condition number {cond:.3g})")
    return np.linalg.solve(mat, rhs)


def beat_coefficient(response: SidebandResponse) -> complex:
    """Complex amplitude of the photocurrent component at the modulation frequency."""
    return (np.conjugate(response.a_out_carrier) * response.a_out_plus
            + response.a_out_carrier * np.conjugate(response.a_out_minus))


def pdh_error(params: ModelParams, state: FieldState, mod: ModulationSpec,
              *, clamp_pump: bool = False, delta_b: float | None = None) -> float:
    """Demodulated error signal Re[C e^{-i demod_phase}] at one detuning."""
    response = sideband_response(params, state, mod, clamp_pump=clamp_pump,
                                 delta_b=delta_b)
    return float((beat_coefficient(response) * np.exp(-1j * mod.demod_phase)).real)


def pdh_error_far(params: ModelParams, state: FieldState, mod: ModulationSpec) -> float:
    """Far-sideband approximation: sidebands fully reflected off resonance.

    With the default quadrature this is -depth * seed_amp * Im[reflected
    carrier]; the positive constant is depth * seed_amp^2 when expressed
    against Im[carrier reflection coefficient].
    """
    a_out = dynamics.reflected_subharmonic(params, state.a)
    return float(mod.depth * params.seed_amp * a_out.imag * math.sin(mod.demod_phase))


def lock_slope(params: ModelParams, mod: ModulationSpec, *, d_delta: float = 1e-4,
               clamp_pump: bool = False) -> float:
    """Slope of the error signal through its zero crossing at delta = 0."""
    from . import steady  # local import to avoid a cycle

    values = []
    for sgn in (+1.0, -1.0):
        delta = sgn * d_delta
        if clamp_pump:
            state = steady.clamped_pump_steady(params, delta)
        else:
            state = steady.solve_steady(params, delta)
        values.append(pdh_error(params, state, mod, clamp_pump=clamp_pump))
    return (values[0] - values[1]) / (2.0 * d_delta)
