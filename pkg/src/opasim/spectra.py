"""Detuning sweeps: reflection, transmission, phase, pump power, error signal.

A sweep runs the steady-state solver across a uniform detuning grid with
warm-start continuation and a cold-start cross check, then forms the
observables from the input-output relations.  Feature extraction locates
the transparency window, its width at half prominence, the central phase
slope, and the interior extrema of the reflection curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import find_peaks, peak_widths

from . import dynamics, steady
from .errors import FeatureAbsent, MultiStability
from .params import FieldState, ModelParams
from .pdh import DEFAULT_DEMOD_PHASE, ModulationSpec, pdh_error, sideband_response

TRIPLE_RESONANT = "triple_resonant"
DOUBLE_RESONANT = "double_resonant"


@dataclass(frozen=True)
class SweepSpec:
    """Detuning grid and sweep options (detunings in units of gamma)."""

    delta_min: float
    delta_max: float
    n_points: int
    mode: str = TRIPLE_RESONANT
    include_sidebands: bool = False
    sideband_freq: float = 10.0
    mod_depth: float = 0.2
    demod_phase: float = DEFAULT_DEMOD_PHASE
    check_multistability: bool = True

    def __post_init__(self):
        if not self.delta_min < self.delta_max:
            raise ValueError("delta_min must be < delta_max")
        if self.n_points < 3:
            raise ValueError("n_points must be >= 3")
        if self.mode not in (TRIPLE_RESONANT, DOUBLE_RESONANT):
            raise ValueError(f"unknown sweep mode {self.mode!r}")
        if self.include_sidebands and self.sideband_freq <= 0.0:
            raise ValueError("sideband_freq must be > 0 when sidebands are enabled")


@dataclass
class SpectraTable:
    """Swept observables on a strictly increasing detuning grid.

    refl_power and trans_power are normalized to the total injected
    subharmonic power (carrier plus sidebands when modulation is on);
    phase is the unwrapped argument of the reflected carrier.  The
    intracavity amplitude arrays are kept for audits and are not part of
    the serialized schema.
    """

    delta: np.ndarray
    refl_power: np.ndarray
    trans_power: np.ndarray
    phase: np.ndarray
    pump_intracavity: np.ndarray
    pdh_error: np.ndarray | None
    a: np.ndarray
    b: np.ndarray
    sb_plus: np.ndarray | None
    sb_minus: np.ndarray | None
    input_power: float
    params: ModelParams
    spec: SweepSpec


@dataclass(frozen=True)
class FeatureSet:
    """Scalar features of a reflection spectrum."""

    dip_depth: float
    window_width_fwhm: float | None
    window_delta: float | None
    center_slope: float
    extrema_count: int


def _solve_grid(params: ModelParams, spec: SweepSpec) -> list[FieldState]:
    opts = steady.SolveOptions()
    f_a, f_b = dynamics.drive_terms(params)
    drive_scale = max(abs(f_a), abs(f_b), 1e-300)
    states: list[FieldState] = []
    prev: FieldState | None = None
    for delta in np.linspace(spec.delta_min, spec.delta_max, spec.n_points):
        delta = float(delta)
        if spec.mode == DOUBLE_RESONANT:
            state = steady.clamped_pump_steady(params, delta)
        else:
            cold = steady.solve_steady(params, delta, opts)
            if prev is None:
                state = cold
            else:
                warm = steady.solve_steady(params, delta,
                                           replace(opts, warm_start=prev))
                if spec.check_multistability:
                    # Two converged iterates are indistinguishable within the
                    # residual tolerance mapped through the local Jacobian;
                    # anything beyond that is a genuine second branch.
                    jac = dynamics.real_jacobian(params, warm.a, warm.b, delta)
                    sv_min = float(np.linalg.svd(jac, compute_uv=False)[-1])
                    same_tol = 10.0 * opts.tol * drive_scale / max(sv_min, 1e-300)
                    gap = max(abs(cold.a - warm.a), abs(cold.b - warm.b))
                    if gap > same_tol:
                        raise MultiStability(
                            f"cold and warm solves disagree at delta={delta!r} "
                            f"(gap {gap:.3e})", delta=delta, cold=cold, warm=warm)
                state = warm
        states.append(state)
        prev = state
    return states


def sweep(params: ModelParams, spec: SweepSpec) -> SpectraTable:
    """Run a detuning sweep and assemble the observable columns."""
    if params.seed_amp <= 0.0:
        raise ValueError("sweep requires seed_amp > 0 (observables are "
                         "normalized to the probe input)")
    if params.pump_ratio >= 1.0:
        raise ValueError("sweep requires pump_ratio < 1 for seeded "
                         "below-threshold operation")

    states = _solve_grid(params, spec)
    delta = np.array([s.delta for s in states])
    a = np.array([s.a for s in states])
    b = np.array([s.b for s in states])

    a_in = params.seed_amp
    a_out = dynamics.reflected_subharmonic(params, a)
    a_trans = dynamics.transmitted_subharmonic(params, a)
    refl = np.abs(a_out) ** 2
    trans = np.abs(a_trans) ** 2
    input_power = a_in**2

    pdh_col = None
    sb_plus = sb_minus = None
    if spec.include_sidebands:
        mod = ModulationSpec(omega=spec.sideband_freq, depth=spec.mod_depth,
                             demod_phase=spec.demod_phase)
        clamp = spec.mode == DOUBLE_RESONANT
        pdh_col = np.empty(len(states))
        sb_plus = np.empty(len(states), dtype=complex)
        sb_minus = np.empty(len(states), dtype=complex)
        refl_sb = np.empty(len(states))
        trans_sb = np.empty(len(states))
        for i, state in enumerate(states):
            resp = sideband_response(params, state, mod, clamp_pump=clamp)
            sb_plus[i] = resp.a_plus
            sb_minus[i] = resp.a_minus
            refl_sb[i] = abs(resp.a_out_plus) ** 2 + abs(resp.a_out_minus) ** 2
            trans_sb[i] = (2.0 * params.gamma_c
                           * (abs(resp.a_plus) ** 2 + abs(resp.a_minus) ** 2))
            pdh_col[i] = pdh_error(params, state, mod, clamp_pump=clamp)
        # Total injected power includes the two first-order sidebands.
        input_power = a_in**2 * (1.0 + 0.5 * spec.mod_depth**2)
        refl = refl + refl_sb
        trans = trans + trans_sb

    phase = np.unwrap(np.angle(a_out / a_in))
    return SpectraTable(
        delta=delta,
        refl_power=refl / input_power,
        trans_power=trans / input_power,
        phase=phase,
        pump_intracavity=np.abs(b) ** 2,
        pdh_error=pdh_col,
        a=a,
        b=b,
        sb_plus=sb_plus,
        sb_minus=sb_minus,
        input_power=input_power,
        params=params,
        spec=spec,
    )


def interior_extrema(values: np.ndarray) -> list[int]:
    """Indices of interior extrema via sign changes of the discrete derivative.

    Plateaus count once, at their leftmost index.
    """
    diff = np.diff(values)
    nonzero = np.nonzero(diff)[0]
    if nonzero.size < 2:
        return []
    signs = np.sign(diff[nonzero])
    flips = np.nonzero(signs[1:] * signs[:-1] < 0)[0]
    return [int(nonzero[k]) + 1 for k in flips]


def _center_index(delta: np.ndarray) -> int:
    idx = int(np.argmin(np.abs(delta)))
    if idx == 0 or idx == len(delta) - 1:
        raise ValueError("detuning grid must contain an interior point near zero")
    return idx


def extract_features(table: SpectraTable, *, require_window: bool = True) -> FeatureSet:
    """Measure window width, central slope, dip depth and extrema count.

    The transparency window is the reflection local maximum nearest zero
    detuning; its width is taken at half prominence.  When no such
    central maximum exists, raise FeatureAbsent if require_window is set,
    otherwise report the window fields as None.
    """
    refl = table.refl_power
    delta = table.delta
    spacing = float(delta[1] - delta[0])
    half_span = 0.5 * float(delta[-1] - delta[0])

    idx0 = _center_index(delta)
    center_slope = float((table.phase[idx0 + 1] - table.phase[idx0 - 1])
                         / (delta[idx0 + 1] - delta[idx0 - 1]))
    edge_ref = 0.5 * (refl[0] + refl[-1])
    dip_depth = float(edge_ref - np.min(refl))
    count = len(interior_extrema(refl))

    window_width = None
    window_delta = None
    peaks, _ = find_peaks(refl)
    if peaks.size:
        nearest = int(peaks[np.argmin(np.abs(delta[peaks]))])
        # Only a maximum sitting at the middle of the dip counts as the window.
        central_tol = max(3.0 * spacing, 0.05 * half_span)
        if abs(delta[nearest]) <= central_tol:
            widths, _, _, _ = peak_widths(refl, [nearest], rel_height=0.5)
            window_width = float(widths[0] * spacing)
            window_delta = float(delta[nearest])
    if window_width is None and require_window:
        raise FeatureAbsent("no central reflection maximum: the spectrum has no "
                            "transparency window")
    return FeatureSet(
        dip_depth=dip_depth,
        window_width_fwhm=window_width,
        window_delta=window_delta,
        center_slope=center_slope,
        extrema_count=count,
    )


def linear_reflection(params: ModelParams, delta) -> np.ndarray:
    """Pump-off reflection coefficient r(delta) = 2 gamma_in / (gamma + i delta) - 1."""
    return 2.0 * params.gamma_in / (params.gamma + 1j * np.asarray(delta, dtype=float)) - 1.0


def linear_phase_slope(params: ModelParams) -> float:
    """d arg(r) / d delta at zero detuning for the pump-off cavity.

    With g = gamma_in - gamma_c - gamma_l this is -2 gamma_in / (gamma g),
    equal to 2 gamma_in (gamma_c + gamma_l - gamma_in) / (gamma g^2).
    """
    g = params.gamma_in - params.gamma_c - params.gamma_l
    if g == 0.0:
        raise ValueError("critically coupled cavity: central phase slope diverges")
    return -2.0 * params.gamma_in / (params.gamma * g)


def passive_loss_power(table: SpectraTable) -> np.ndarray:
    """Internally dissipated subharmonic power, normalized like the table columns."""
    params = table.params
    total = np.abs(table.a) ** 2
    if table.sb_plus is not None:
        total = total + np.abs(table.sb_plus) ** 2 + np.abs(table.sb_minus) ** 2
    return 2.0 * params.gamma_l * total / table.input_power
