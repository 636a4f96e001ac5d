"""Cavity-length scans with a thermo-optic relaxation variable.

The slow variable theta is the thermally induced detuning shift at the
pump frequency; it relaxes toward alpha_th * |b|^2 with time constant
tau_th while the optical fields follow quasi-statically:

    d theta / dt = (alpha_th |b|^2 - theta) / tau_th
    delta_b,eff  = delta_b,geo(t) - theta
    delta_a,eff  = delta_a,geo(t) - coupling_sub * theta

The thermal path-length change is common to both fields, so its detuning
contribution scales with optical frequency; coupling_sub = 1/2 keeps the
pump shift at twice the subharmonic shift.  A full-ODE mode integrates
the optical equations explicitly for validation on fast scans.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp

from . import dynamics, steady
from .errors import PeakNotFound
from .params import ModelParams


@dataclass(frozen=True)
class ThermalParams:
    """Thermal response: shift per unit pump power, relaxation time, couplings.

    gamma_per_time expresses the optical decay unit in scan-time units;
    it only enters the quasi-static validity check and the full-ODE mode.
    """

    alpha_th: float = 0.0015
    tau_th: float = 0.05
    coupling_sub: float = 0.5
    gamma_per_time: float = 1e6

    def __post_init__(self):
        if self.tau_th <= 0.0:
            raise ValueError("tau_th must be > 0")
        if self.alpha_th < 0.0:
            raise ValueError("alpha_th must be >= 0")
        if self.gamma_per_time <= 0.0:
            raise ValueError("gamma_per_time must be > 0")


@dataclass(frozen=True)
class ScanWaveform:
    """Triangular cavity-length scan, expressed as a subharmonic detuning ramp.

    One period ramps from offset - amplitude/2 up to offset + amplitude/2
    and back; amplitude is the peak-to-peak detuning span in gamma units.
    """

    period: float = 1.0
    amplitude: float = 3.0
    offset: float = 0.0
    n_samples: int = 2001
    shape: str = "triangular"

    def __post_init__(self):
        if self.shape != "triangular":
            raise ValueError(f"unsupported scan shape {self.shape!r}")
        if self.period <= 0.0 or self.amplitude <= 0.0:
            raise ValueError("period and amplitude must be > 0")
        if self.n_samples < 16:
            raise ValueError("n_samples must be >= 16")

    def value(self, t):
        """Geometric subharmonic detuning at scan time t (scalar or array)."""
        phase = np.mod(np.asarray(t, dtype=float), self.period) / self.period
        tri = np.where(phase <= 0.5, 2.0 * phase, 2.0 * (1.0 - phase))
        out = self.offset + self.amplitude * (tri - 0.5)
        return float(out) if np.isscalar(t) else out


@dataclass
class ThermalTrace:
    """Time series of one or more full scan periods."""

    t: np.ndarray
    scan_value: np.ndarray
    theta: np.ndarray
    pump_trans: np.ndarray
    sub_refl: np.ndarray
    params: ModelParams
    thermal: ThermalParams
    scan: ScanWaveform
    n_periods: int


def _fields_at(params: ModelParams, tp: ThermalParams, delta_geo: float,
               theta: float) -> tuple[complex, complex]:
    delta_a = delta_geo - tp.coupling_sub * theta
    delta_b = params.detune_ratio * delta_geo - theta
    if params.seed_amp == 0.0:
        state = steady.seedless_state(params, delta_a, delta_b=delta_b)
    else:
        state = steady.solve_steady(params, delta_a, delta_b=delta_b)
    return state.a, state.b


def thermal_scan(params: ModelParams, tp: ThermalParams, scan: ScanWaveform,
                 pump_ratio: float, *, n_periods: int = 1,
                 method: str = "quasistatic",
                 rtol: float = 1e-8, atol: float = 1e-10) -> ThermalTrace:
    """Integrate the thermal variable across triangular scan ramps.

    Quasi-static mode (default) eliminates the optical fields; the
    full_ode mode integrates them alongside theta using gamma_per_time to
    convert optical rates into scan-time units.
    """
    if pump_ratio >= 1.0:
        raise ValueError("thermal_scan requires pump_ratio < 1 (oscillation "
                         "above threshold is not modeled)")
    if n_periods < 1:
        raise ValueError("n_periods must be >= 1")
    p = replace(params, pump_ratio=pump_ratio)

    # Quasi-static validity: each mode must cross its own linewidth slowly,
    # slew * lifetime <= 0.1 * linewidth.  The narrow pump mode is the
    # binding constraint when gamma_b << gamma.
    slew = scan.amplitude / (0.5 * scan.period)
    for label, mode_slew, width in (
            ("subharmonic", slew, p.gamma),
            ("pump", abs(p.detune_ratio) * slew, p.gamma_b)):
        if mode_slew > 0.1 * width**2 * tp.gamma_per_time:
            warnings.warn(f"scan slew exceeds 0.1 {label} linewidths per {label} "
                          "lifetime: the quasi-static elimination is marginal",
                          stacklevel=2)

    t_end = n_periods * scan.period
    t_eval = np.linspace(0.0, t_end, (scan.n_samples - 1) * n_periods + 1)

    if method == "quasistatic":
        def rhs(t, y):
            _, b = _fields_at(p, tp, float(scan.value(t)), float(y[0]))
            return [(tp.alpha_th * abs(b) ** 2 - y[0]) / tp.tau_th]

        sol = solve_ivp(rhs, (0.0, t_end), [0.0], method="RK45", t_eval=t_eval,
                        rtol=rtol, atol=atol, max_step=scan.period / 64.0)
        if not sol.success:
            raise RuntimeError(f"thermal integration failed: {sol.message}")
        theta = sol.y[0]
        a = np.empty(t_eval.size, dtype=complex)
        b = np.empty(t_eval.size, dtype=complex)
        for i, (ti, th) in enumerate(zip(t_eval, theta)):
            a[i], b[i] = _fields_at(p, tp, float(scan.value(ti)), float(th))
    elif method == "full_ode":
        gt = tp.gamma_per_time

        def rhs(t, y):
            amp = (complex(y[0], y[1]), complex(y[2], y[3]))
            delta_geo = float(scan.value(t))
            da, db = dynamics.equations_of_motion(
                p, amp, delta_geo - tp.coupling_sub * y[4],
                delta_b=p.detune_ratio * delta_geo - y[4])
            dtheta = (tp.alpha_th * abs(amp[1]) ** 2 - y[4]) / tp.tau_th
            return [gt * da.real, gt * da.imag, gt * db.real, gt * db.imag, dtheta]

        a0, b0 = _fields_at(p, tp, float(scan.value(0.0)), 0.0)
        y0 = [a0.real, a0.imag, b0.real, b0.imag, 0.0]
        sol = solve_ivp(rhs, (0.0, t_end), y0, method="LSODA", t_eval=t_eval,
                        rtol=rtol, atol=atol)
        if not sol.success:
            raise RuntimeError(f"thermal integration failed: {sol.message}")
        a = sol.y[0] + 1j * sol.y[1]
        b = sol.y[2] + 1j * sol.y[3]
        theta = sol.y[4]
    else:
        raise ValueError(f"unknown method {method!r}")

    pump_trans = 2.0 * p.gamma_b_l * np.abs(b) ** 2
    if p.seed_amp > 0.0:
        sub_refl = np.abs(dynamics.reflected_subharmonic(p, a)) ** 2 / p.seed_amp**2
    else:
        # No probe injected: report zero rather than an undefined ratio.
        sub_refl = np.zeros_like(pump_trans)

    return ThermalTrace(
        t=t_eval,
        scan_value=scan.value(t_eval),
        theta=np.asarray(theta, dtype=float),
        pump_trans=pump_trans,
        sub_refl=sub_refl,
        params=p,
        thermal=tp,
        scan=scan,
        n_periods=n_periods,
    )


def _half_crossings(x: np.ndarray, y: np.ndarray, label: str) -> tuple[float, float, float]:
    """(left, right, center) half-maximum crossings of the peak in y over x."""
    peak = int(np.argmax(y))
    if peak == 0 or peak == y.size - 1:
        raise PeakNotFound(f"{label} ramp: transmission maximum sits at the "
                           "segment edge")
    base = float(np.min(y))
    half = base + 0.5 * (y[peak] - base)
    if y[peak] <= base:
        raise PeakNotFound(f"{label} ramp: flat transmission, no peak")

    def cross(i, j, step):
        k = i
        while y[k] > half:
            k += step
            if k < 0 or k >= y.size:
                raise PeakNotFound(f"{label} ramp: peak is not resolved down to "
                                   "half maximum inside the segment")
        # linear interpolation between k and k-step
        k0, k1 = k - step, k
        frac = (half - y[k0]) / (y[k1] - y[k0])
        return float(x[k0] + frac * (x[k1] - x[k0]))

    left = cross(peak, 0, -1)
    right = cross(peak, y.size - 1, +1)
    return left, right, 0.5 * (left + right)


def _ramp_segments(trace: ThermalTrace) -> tuple[np.ndarray, np.ndarray]:
    """Index masks of the up and down ramps of the last full period."""
    period = trace.scan.period
    t0 = (trace.n_periods - 1) * period
    t = trace.t
    up = (t >= t0) & (t <= t0 + 0.5 * period)
    down = (t >= t0 + 0.5 * period) & (t <= t0 + period)
    if np.count_nonzero(up) < 8 or np.count_nonzero(down) < 8:
        raise ValueError("trace does not resolve one full up+down ramp")
    return up, down


def ramp_widths(trace: ThermalTrace) -> tuple[float, float]:
    """Full width at half maximum of the pump peak on each ramp, in scan units."""
    up, down = _ramp_segments(trace)
    lu, ru, _ = _half_crossings(trace.scan_value[up], trace.pump_trans[up], "up")
    ld, rd, _ = _half_crossings(trace.scan_value[down], trace.pump_trans[down], "down")
    return abs(ru - lu), abs(rd - ld)


def ramp_peak_centers(trace: ThermalTrace) -> tuple[float, float]:
    """Half-maximum midpoints of the pump peak on the up and down ramps."""
    up, down = _ramp_segments(trace)
    _, _, cu = _half_crossings(trace.scan_value[up], trace.pump_trans[up], "up")
    _, _, cd = _half_crossings(trace.scan_value[down], trace.pump_trans[down], "down")
    return cu, cd


def asymmetry_metric(trace: ThermalTrace) -> float:
    """|W_up - W_down| / (W_up + W_down) of the pump transmission peak widths."""
    w_up, w_down = ramp_widths(trace)
    total = w_up + w_down
    if total == 0.0:
        return 0.0
    return abs(w_up - w_down) / total


def static_thermal_branch(params: ModelParams, tp: ThermalParams,
                          scan_values: np.ndarray, pump_ratio: float
                          ) -> tuple[np.ndarray, np.ndarray]:
    """Self-consistent thermal equilibrium traced by continuation.

    For each scan value, solves theta = alpha_th |b(theta)|^2 starting
    near the previous solution, so folds resolve in the direction of the
    sweep.  Returns (theta, pump_trans) arrays; this is the infinitely
    slow scan limit of thermal_scan.
    """
    from scipy.optimize import brentq

    p = replace(params, pump_ratio=pump_ratio)

    def imbalance(theta, delta_geo: float):
        if p.seed_amp == 0.0:
            _, f_b = dynamics.drive_terms(p)
            d_eff = p.detune_ratio * delta_geo - theta
            power = abs(f_b) ** 2 / (p.gamma_b**2 + d_eff**2)
        else:
            _, b = _fields_at(p, tp, delta_geo, float(theta))
            power = abs(b) ** 2
        return tp.alpha_th * power - theta

    # Upper bound on the equilibrium shift: alpha_th times the resonant
    # intracavity pump power.
    _, b_res = _fields_at(p, tp, 0.0, 0.0)
    theta_cap = max(tp.alpha_th * abs(b_res) ** 2, 10.0 * p.gamma_b, 1e-6)
    probe = np.linspace(-0.1 * theta_cap, 1.2 * theta_cap, 1024)

    thetas = np.empty(len(scan_values))
    trans = np.empty(len(scan_values))
    theta_prev = 0.0
    for i, s in enumerate(np.asarray(scan_values, dtype=float)):
        if p.seed_amp == 0.0:
            values = imbalance(probe, s)
        else:
            values = np.array([imbalance(th, s) for th in probe])
        crossings = np.nonzero(np.sign(values[1:]) * np.sign(values[:-1]) < 0)[0]
        roots = [brentq(lambda th: imbalance(float(th), s), probe[k], probe[k + 1],
                        xtol=1e-12) for k in crossings]
        if not roots:
            roots = [0.0]
        # Follow the branch continuous with the previous point.
        theta_prev = min(roots, key=lambda th: abs(th - theta_prev))
        _, b = _fields_at(p, tp, s, theta_prev)
        thetas[i] = theta_prev
        trans[i] = 2.0 * p.gamma_b_l * abs(b) ** 2
    return thetas, trans
