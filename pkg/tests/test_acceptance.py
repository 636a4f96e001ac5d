"""Acceptance suite: one test per criterion, each printing a pass line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
summary lines alongside the pytest verdicts.
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest

from opasim import (CavityParams, ModelParams, ModulationSpec, SweepSpec,
                    calibrate_kappa, classical_gain, extract_features,
                    linear_reflection, pdh_error, pdh_error_far, seedless_state,
                    solve_steady, stability, sweep, threshold_power,
                    undepleted_steady)
from opasim import ScanWaveform, ThermalParams, asymmetry_metric, thermal_scan
from opasim.dynamics import (drive_terms, energy_flux_residual,
                             equations_of_motion, parametric_photon_rates)
from opasim.spectra import interior_extrema


def _report(name, detail):
    print(f"[PASS] {name}: {detail}")


def test_linear_oracle():
    p = replace(ModelParams.defaults(), kappa=0.0)
    start = time.perf_counter()
    table = sweep(p, SweepSpec(delta_min=-10.0, delta_max=10.0, n_points=2001))
    elapsed = time.perf_counter() - start
    r = linear_reflection(p, table.delta)
    dev_r = np.max(np.abs(table.refl_power - np.abs(r) ** 2))
    trans = 4 * p.gamma_in * p.gamma_c / (p.gamma**2 + table.delta**2)
    dev_t = np.max(np.abs(table.trans_power - trans))
    dev_p = np.max(np.abs(table.phase - np.unwrap(np.angle(r))))
    assert dev_r <= 1e-10 and dev_t <= 1e-10 and dev_p <= 1e-10
    assert elapsed < 1.0
    _report("linear-oracle",
            f"max dev refl {dev_r:.2e}, trans {dev_t:.2e}, phase {dev_p:.2e}, "
            f"runtime {elapsed:.2f} s")


def test_threshold_crossing_and_calibration():
    def max_real_eig(pump_ratio):
        p = ModelParams.defaults(pump_ratio=pump_ratio, seed_amp=0.0)
        report = stability(p, seedless_state(p, 0.0))
        return float(np.max(report.eigenvalues.real))

    lo, hi = 0.5, 1.5
    assert max_real_eig(lo) < 0 < max_real_eig(hi)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if max_real_eig(mid) < 0:
            lo = mid
        else:
            hi = mid
    crossing = 0.5 * (lo + hi)
    assert abs(crossing - 1.0) <= 1e-6

    cavity = CavityParams()
    kappa = calibrate_kappa(cavity, threshold_power=0.090)
    back = threshold_power(cavity, kappa)
    residual = abs(back - 0.090) / 0.090
    assert residual <= 1e-9
    _report("threshold",
            f"stability crossing at pump_ratio {crossing:.9f}, calibration "
            f"round trip residual {residual:.2e}")


def test_deamplification_gain():
    worst = 0.0
    for pump_ratio in (0.15, 0.3):
        p = ModelParams.defaults(pump_ratio=pump_ratio, theta=math.pi,
                                 seed_amp=1e-6)
        bare = solve_steady(replace(p, kappa=0.0, pump_ratio=0.0), 0.0)
        pumped = solve_steady(p, 0.0)
        gain = abs(pumped.a) ** 2 / abs(bare.a) ** 2
        target = 1.0 / (1.0 + math.sqrt(pump_ratio)) ** 2
        worst = max(worst, abs(gain - target))
        assert abs(gain - target) <= 1e-8
        assert classical_gain(p) == pytest.approx(target, abs=1e-12)
    _report("deamplification", f"max |gain - closed form| {worst:.2e} "
            "for pump ratios 0.15 and 0.3")


def _window_width(gamma_b):
    p = ModelParams.defaults(pump_ratio=0.3, theta=math.pi, gamma_b=gamma_b)
    table = sweep(p, SweepSpec(delta_min=-1.0, delta_max=1.0, n_points=2001))
    feats = extract_features(table)
    i0 = int(np.argmin(np.abs(table.delta)))
    for side in (+1, -1):
        i5 = int(np.argmin(np.abs(table.delta - side * 5 * gamma_b)))
        assert table.refl_power[i0] > table.refl_power[i5]
    return feats.window_width_fwhm


def test_transparency_window():
    start = time.perf_counter()
    w20 = _window_width(0.05)
    elapsed = time.perf_counter() - start
    assert 0.5 * 0.05 <= w20 <= 5 * 0.05
    w40 = _window_width(0.025)
    ratio = w20 / w40
    assert 1.5 <= ratio <= 2.5
    assert elapsed < 10.0
    _report("transparency-window",
            f"FWHM {w20 / 0.05:.3f} gamma_b at gamma_b = gamma/20, width ratio "
            f"(gamma/20)/(gamma/40) = {ratio:.3f}, runtime {elapsed:.2f} s")


def test_dispersion_sign_flip():
    p = ModelParams.defaults(pump_ratio=0.3, theta=math.pi)
    spec = SweepSpec(delta_min=-1.0, delta_max=1.0, n_points=2001)
    pumped = extract_features(sweep(p, spec))
    baseline = extract_features(
        sweep(replace(p, kappa=0.0, pump_ratio=0.0), spec), require_window=False)
    assert pumped.center_slope * baseline.center_slope < 0
    assert abs(pumped.center_slope) > 3 * abs(baseline.center_slope)
    _report("dispersion-flip",
            f"pumped slope {pumped.center_slope:.3f} vs bare "
            f"{baseline.center_slope:.3f} "
            f"(|ratio| {abs(pumped.center_slope / baseline.center_slope):.1f})")


def test_double_resonant_contrast():
    # clamped pump with the reference under-coupled port: no window opens
    p_under = ModelParams.defaults(pump_ratio=0.3, theta=math.pi)
    spec_narrow = SweepSpec(delta_min=-1.0, delta_max=1.0, n_points=2001,
                            mode="double_resonant")
    under = extract_features(sweep(p_under, spec_narrow), require_window=False)
    assert under.window_width_fwhm is None
    base_under = extract_features(
        sweep(replace(p_under, kappa=0.0, pump_ratio=0.0),
              SweepSpec(delta_min=-1.0, delta_max=1.0, n_points=2001)),
        require_window=False)
    assert under.center_slope * base_under.center_slope > 0

    # the M shape needs a probe port carrying most of the loss
    total = 0.085
    p_over = ModelParams(gamma_in=0.07 / total, gamma_c=0.01 / total,
                         gamma_l=0.005 / total, gamma_b_in=0.0375,
                         gamma_b_l=0.0125, kappa=0.05, seed_amp=1.0,
                         pump_ratio=0.25, theta=math.pi)  # sigma = 0.5
    spec_wide = SweepSpec(delta_min=-5.0, delta_max=5.0, n_points=2001,
                          mode="double_resonant")
    table = sweep(p_over, spec_wide)
    over = extract_features(table, require_window=False)
    n_extrema = len(interior_extrema(table.refl_power))
    assert n_extrema >= 3
    assert over.window_width_fwhm is None
    base_over = extract_features(
        sweep(replace(p_over, kappa=0.0, pump_ratio=0.0),
              SweepSpec(delta_min=-5.0, delta_max=5.0, n_points=2001)),
        require_window=False)
    assert over.center_slope * base_over.center_slope > 0
    _report("double-resonant-contrast",
            f"no window with pump clamped at 0.3 Pth; {n_extrema} reflection "
            "extrema at sigma = 0.5; central phase slope sign preserved")


def test_pdh_error_signal():
    # far-sideband limit against the imaginary part of the reflected carrier
    p = replace(ModelParams.defaults(), kappa=0.0)
    mod = ModulationSpec(omega=50.0, depth=0.2)
    grid = np.linspace(-3.0, 3.0, 121)
    full = np.empty(grid.size)
    approx = np.empty(grid.size)
    for i, d in enumerate(grid):
        st = solve_steady(p, float(d))
        full[i] = pdh_error(p, st, mod)
        approx[i] = pdh_error_far(p, st, mod)
    peak = np.max(np.abs(full))
    dev = np.max(np.abs(full - approx)) / peak
    assert dev <= 0.02

    # modulation satellites in transmission at +-Omega, height (m/2)^2
    spec_sb = SweepSpec(delta_min=-15.0, delta_max=15.0, n_points=1201,
                        include_sidebands=True, sideband_freq=10.0,
                        mod_depth=0.2)
    with_sb = sweep(p, spec_sb)
    without = sweep(p, SweepSpec(delta_min=-15.0, delta_max=15.0, n_points=1201))
    carrier_norm = 1.0 + 0.5 * 0.2**2
    main = with_sb.trans_power[int(np.argmin(np.abs(with_sb.delta)))]
    worst_sat = 0.0
    for side in (+1.0, -1.0):
        i = int(np.argmin(np.abs(with_sb.delta - side * 10.0)))
        height = with_sb.trans_power[i] - without.trans_power[i] / carrier_norm
        rel = height / main
        worst_sat = max(worst_sat, abs(rel / 0.01 - 1.0))
        assert abs(rel / 0.01 - 1.0) <= 0.05

    # odd error signal with zero crossing for the pumped configuration
    p_pump = ModelParams.defaults(pump_ratio=0.3, theta=math.pi)
    asym, peak_p = 0.0, 0.0
    for d in np.linspace(0.05, 1.5, 20):
        plus = pdh_error(p_pump, solve_steady(p_pump, float(d)), mod)
        minus = pdh_error(p_pump, solve_steady(p_pump, float(-d)), mod)
        asym = max(asym, abs(plus + minus))
        peak_p = max(peak_p, abs(plus))
    err0 = pdh_error(p_pump, solve_steady(p_pump, 0.0), mod)
    assert asym < 1e-9 * peak_p
    assert abs(err0) < 1e-12 * peak_p
    _report("pdh", f"far-sideband deviation {dev * 100:.2f}% of peak, satellite "
            f"height error {worst_sat * 100:.2f}%, error odd with zero "
            "crossing at resonance")


def test_thermal_asymmetry_ordering():
    p = ModelParams.defaults(seed_amp=0.0)
    scan = ScanWaveform(period=1.0, amplitude=3.0, n_samples=801)
    tp = ThermalParams(alpha_th=0.0015, tau_th=0.05)
    metrics = {}
    worst_time = 0.0
    for pump_ratio in (0.2, 0.5, 0.9):
        start = time.perf_counter()
        trace = thermal_scan(p, tp, scan, pump_ratio, n_periods=2)
        elapsed = time.perf_counter() - start
        worst_time = max(worst_time, elapsed)
        assert elapsed < 5.0
        metrics[pump_ratio] = asymmetry_metric(trace)
    assert metrics[0.2] < metrics[0.5] < metrics[0.9]

    cold = thermal_scan(p, ThermalParams(alpha_th=0.0, tau_th=0.05), scan, 0.5)
    assert asymmetry_metric(cold) < 1e-9
    _report("thermal-asymmetry",
            "metrics " + ", ".join(f"{k}: {v:.3f}" for k, v in metrics.items())
            + f"; zero without thermal shift; slowest trace {worst_time:.2f} s")


def _grid_minimize(p, delta, rounds=3, n=15):
    a0, b0 = undepleted_steady(p, delta)
    center = np.array([a0.real, a0.imag, b0.real, b0.imag])
    amp = max(abs(a0), abs(b0), 0.3)
    span = np.full(4, 0.75 * amp)
    spacing = None
    for _ in range(rounds):
        axes = [np.linspace(center[i] - span[i], center[i] + span[i], n)
                for i in range(4)]
        grids = np.meshgrid(*axes, indexing="ij")
        a = grids[0] + 1j * grids[1]
        b = grids[2] + 1j * grids[3]
        da, db = equations_of_motion(p, (a, b), delta)
        r2 = np.abs(da) ** 2 + np.abs(db) ** 2
        k = np.unravel_index(np.argmin(r2), r2.shape)
        center = np.array([axes[i][k[i]] for i in range(4)])
        spacing = 2 * span[0] / (n - 1)
        span = np.full(4, 2 * spacing)
    return center, spacing


def test_solver_contracts():
    rng = np.random.default_rng(20240811)
    worst_gap = 0.0
    worst_flux = 0.0
    for _ in range(20):
        p = ModelParams(
            gamma_in=rng.uniform(0.2, 1.0),
            gamma_c=rng.uniform(0.2, 1.0),
            gamma_l=rng.uniform(0.2, 1.0),
            gamma_b_in=rng.uniform(0.1, 0.5),
            gamma_b_l=rng.uniform(0.1, 0.5),
            kappa=rng.uniform(0.05, 0.15),
            seed_amp=rng.uniform(0.5, 2.0),
            pump_ratio=rng.uniform(0.05, 0.7),
            theta=rng.uniform(0.0, 2 * math.pi),
        )
        delta = float(rng.uniform(-1.5, 1.5))
        state = solve_steady(p, delta)
        center, spacing = _grid_minimize(p, delta)
        newton = np.array([state.a.real, state.a.imag, state.b.real,
                           state.b.imag])
        gap = float(np.max(np.abs(newton - center)))
        assert gap <= spacing
        worst_gap = max(worst_gap, gap / spacing)

        flux = abs(energy_flux_residual(p, (state.a, state.b)))
        assert flux <= 1e-9
        worst_flux = max(worst_flux, flux)
        sub_gain, pump_loss = parametric_photon_rates(p, (state.a, state.b))
        scale = max(abs(sub_gain), abs(pump_loss), 1e-12)
        assert abs(sub_gain - 2.0 * pump_loss) <= 1e-9 * scale
    _report("solver-contracts",
            f"20 random instances: worst grid gap {worst_gap:.2f} of one cell, "
            f"worst flux residual {worst_flux:.2e}")
