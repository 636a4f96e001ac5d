"""Command-line front end: config loading, subcommands, artifact output.

Configs are YAML (JSON also parses) with exactly one parameter style:
a ``model`` section with normalized rates or a ``cavity`` section with
physical mirror data.  Leaf keys can be overridden with repeated
``--set section.key=value`` flags.  Every artifact embeds the fully
resolved configuration, so a provenance JSON can be re-ingested as a
config and reproduces the same outputs.

Exit codes: 0 success, 2 config error, 3 solver failure, 4 feature
extraction failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

import yaml

from . import __version__, artifacts
from .errors import (AboveThresholdUnstableSeedless, ConfigError, FeatureAbsent,
                     MultiStability, NonConvergence, PeakNotFound, SingularResponse)
from .params import (CavityParams, ModelParams, calibrate_kappa, derive_rates,
                     threshold_power)
from .pdh import DEFAULT_DEMOD_PHASE
from .spectra import SweepSpec, extract_features, sweep
from .steady import classical_gain
from .thermal import ScanWaveform, ThermalParams, thermal_scan

_MODEL_KEYS = ("gamma_in", "gamma_c", "gamma_l", "gamma_b_in", "gamma_b_l",
               "kappa", "detune_ratio")
_CAVITY_KEYS = ("mirror_separation", "crystal_length", "crystal_index_sub",
                "crystal_index_pump", "r_in_sub", "r_out_sub", "r_in_pump",
                "r_out_pump", "loss_sub", "loss_pump", "wavelength_sub",
                "threshold_power")
_DRIVE_KEYS = ("pump_ratio", "theta", "pump_phi", "seed_amp")
_SWEEP_KEYS = ("delta_min", "delta_max", "n_points", "mode", "include_sidebands",
               "sideband_freq", "mod_depth")
_MODULATION_KEYS = ("omega", "depth", "demod_phase")
_THERMAL_KEYS = ("alpha_th", "tau_th", "coupling_sub", "gamma_per_time")
_SCAN_KEYS = ("period", "amplitude", "offset", "n_samples", "n_periods")
_TOP_KEYS = ("model", "cavity", "drive", "sweep", "modulation", "thermal",
             "scan", "seedless", "output_dir")


def load_config(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file {path!r} does not parse: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config file {path!r} must hold a mapping")
    # A provenance document carries the original config under "config".
    if "schema_version" in doc and "config" in doc:
        doc = doc["config"]
        if not isinstance(doc, dict):
            raise ConfigError("provenance document has a malformed 'config' entry")
    return doc


def apply_overrides(cfg: dict, sets: list[str]) -> dict:
    for item in sets:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key.path=value")
        dotted, raw = item.split("=", 1)
        keys = dotted.strip().split(".")
        if not all(keys):
            raise ConfigError(f"override {item!r} has an empty key component")
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ConfigError(f"override value {raw!r} does not parse: {exc}") from exc
        node = cfg
        for key in keys[:-1]:
            node = node.setdefault(key, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override {dotted!r} descends through a non-mapping")
        node[keys[-1]] = value
    return cfg


def _check_keys(section: dict, allowed: tuple[str, ...], name: str) -> None:
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown key '{name}.{key}'")


def _number(section: dict, name: str, key: str, default=None) -> float:
    value = section.get(key, default)
    if value is None:
        raise ConfigError(f"missing required key '{name}.{key}'")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"key '{name}.{key}' must be a number, got {value!r}")
    return float(value)


def resolve_config(cfg: dict) -> dict:
    """Validate and materialize every default; returns a plain dict."""
    if not isinstance(cfg, dict):
        raise ConfigError("configuration must be a mapping")
    _check_keys(cfg, _TOP_KEYS, "<top>")
    has_model = "model" in cfg
    has_cavity = "cavity" in cfg
    if has_model == has_cavity:
        raise ConfigError("exactly one of 'model' or 'cavity' must be present "
                          "(normalized or physical units, never both)")

    resolved: dict = {}
    drive = dict(cfg.get("drive") or {})
    _check_keys(drive, _DRIVE_KEYS, "drive")
    if "theta" in drive and "pump_phi" in drive:
        raise ConfigError("'drive.theta' and 'drive.pump_phi' are aliases; "
                          "give only one")
    theta = (2.0 * _number(drive, "drive", "pump_phi") if "pump_phi" in drive
             else _number(drive, "drive", "theta", math.pi))
    seedless = bool(cfg.get("seedless", False))
    seed_amp = drive.get("seed_amp")
    if seedless and seed_amp not in (None, 0, 0.0):
        raise ConfigError("'seedless: true' conflicts with a nonzero 'drive.seed_amp'")
    resolved["seedless"] = seedless
    resolved["drive"] = {
        "pump_ratio": _number(drive, "drive", "pump_ratio", 0.0),
        "theta": theta,
        "seed_amp": None if seed_amp is None else float(seed_amp),
    }

    if has_model:
        model = dict(cfg.get("model") or {})
        _check_keys(model, _MODEL_KEYS, "model")
        ref = ModelParams.defaults()
        resolved["model"] = {
            "gamma_in": _number(model, "model", "gamma_in", ref.gamma_in),
            "gamma_c": _number(model, "model", "gamma_c", ref.gamma_c),
            "gamma_l": _number(model, "model", "gamma_l", ref.gamma_l),
            "gamma_b_in": _number(model, "model", "gamma_b_in", ref.gamma_b_in),
            "gamma_b_l": _number(model, "model", "gamma_b_l", ref.gamma_b_l),
            "kappa": _number(model, "model", "kappa", ref.kappa),
            "detune_ratio": _number(model, "model", "detune_ratio", ref.detune_ratio),
        }
    else:
        cavity = dict(cfg.get("cavity") or {})
        _check_keys(cavity, _CAVITY_KEYS, "cavity")
        ref_cav = CavityParams()
        resolved["cavity"] = {
            key: _number(cavity, "cavity", key, getattr(ref_cav, key))
            for key in _CAVITY_KEYS if key != "threshold_power"
        }
        resolved["cavity"]["threshold_power"] = _number(cavity, "cavity",
                                                        "threshold_power", 0.090)

    sweep_cfg = dict(cfg.get("sweep") or {})
    _check_keys(sweep_cfg, _SWEEP_KEYS, "sweep")
    mode = sweep_cfg.get("mode", "triple_resonant")
    if mode not in ("triple_resonant", "double_resonant"):
        raise ConfigError(f"key 'sweep.mode' must be triple_resonant or "
                          f"double_resonant, got {mode!r}")
    resolved["sweep"] = {
        "delta_min": _number(sweep_cfg, "sweep", "delta_min", -10.0),
        "delta_max": _number(sweep_cfg, "sweep", "delta_max", 10.0),
        "n_points": int(_number(sweep_cfg, "sweep", "n_points", 2001)),
        "mode": mode,
        "include_sidebands": bool(sweep_cfg.get("include_sidebands", False)),
        "sideband_freq": _number(sweep_cfg, "sweep", "sideband_freq", 10.0),
        "mod_depth": _number(sweep_cfg, "sweep", "mod_depth", 0.2),
    }

    modulation = dict(cfg.get("modulation") or {})
    _check_keys(modulation, _MODULATION_KEYS, "modulation")
    resolved["modulation"] = {
        "omega": _number(modulation, "modulation", "omega", 50.0),
        "depth": _number(modulation, "modulation", "depth", 0.2),
        "demod_phase": _number(modulation, "modulation", "demod_phase",
                               DEFAULT_DEMOD_PHASE),
    }

    thermal_cfg = dict(cfg.get("thermal") or {})
    _check_keys(thermal_cfg, _THERMAL_KEYS, "thermal")
    ref_th = ThermalParams()
    resolved["thermal"] = {
        "alpha_th": _number(thermal_cfg, "thermal", "alpha_th", ref_th.alpha_th),
        "tau_th": _number(thermal_cfg, "thermal", "tau_th", ref_th.tau_th),
        "coupling_sub": _number(thermal_cfg, "thermal", "coupling_sub",
                                ref_th.coupling_sub),
        "gamma_per_time": _number(thermal_cfg, "thermal", "gamma_per_time",
                                  ref_th.gamma_per_time),
    }

    scan_cfg = dict(cfg.get("scan") or {})
    _check_keys(scan_cfg, _SCAN_KEYS, "scan")
    resolved["scan"] = {
        "period": _number(scan_cfg, "scan", "period", 1.0),
        "amplitude": _number(scan_cfg, "scan", "amplitude", 3.0),
        "offset": _number(scan_cfg, "scan", "offset", 0.0),
        "n_samples": int(_number(scan_cfg, "scan", "n_samples", 2001)),
        "n_periods": int(_number(scan_cfg, "scan", "n_periods", 1)),
    }

    output_dir = cfg.get("output_dir", "out")
    if not isinstance(output_dir, str) or not output_dir:
        raise ConfigError("key 'output_dir' must be a non-empty string")
    resolved["output_dir"] = output_dir
    return resolved


def build_model(resolved: dict) -> ModelParams:
    drive = resolved["drive"]
    seed_amp = 0.0 if resolved["seedless"] else drive["seed_amp"]
    try:
        if "model" in resolved:
            m = resolved["model"]
            if seed_amp is None:
                g = m["gamma_in"] + m["gamma_c"] + m["gamma_l"]
                seed_amp = g / math.sqrt(2.0 * m["gamma_in"])
            return ModelParams(
                gamma_in=m["gamma_in"], gamma_c=m["gamma_c"], gamma_l=m["gamma_l"],
                gamma_b_in=m["gamma_b_in"], gamma_b_l=m["gamma_b_l"],
                kappa=m["kappa"], seed_amp=seed_amp,
                pump_ratio=drive["pump_ratio"], theta=drive["theta"],
                detune_ratio=m["detune_ratio"],
            )
        c = dict(resolved["cavity"])
        p_th = c.pop("threshold_power")
        params = ModelParams.from_cavity(
            CavityParams(**c), threshold_power=p_th,
            pump_ratio=drive["pump_ratio"], theta=drive["theta"],
            seed_amp=seed_amp,
        )
        return params
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _output_dir(resolved: dict) -> Path:
    out = Path(resolved["output_dir"])
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"output_dir {resolved['output_dir']!r} is not "
                          f"writable: {exc}") from exc
    return out


def _build_sweep_spec(resolved: dict, *, force_sidebands: bool = False) -> SweepSpec:
    s = resolved["sweep"]
    kwargs = dict(
        delta_min=s["delta_min"], delta_max=s["delta_max"], n_points=s["n_points"],
        mode=s["mode"], include_sidebands=s["include_sidebands"],
        sideband_freq=s["sideband_freq"], mod_depth=s["mod_depth"],
    )
    if force_sidebands:
        m = resolved["modulation"]
        kwargs.update(include_sidebands=True, sideband_freq=m["omega"],
                      mod_depth=m["depth"], demod_phase=m["demod_phase"])
    try:
        return SweepSpec(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"sweep section invalid: {exc}") from exc


def _run_sweep(resolved: dict, name: str, *, force_sidebands: bool = False) -> int:
    if resolved["seedless"]:
        raise ConfigError("a detuning sweep needs a seeded probe; drop "
                          "'seedless: true'")
    params = build_model(resolved)
    spec = _build_sweep_spec(resolved, force_sidebands=force_sidebands)
    table = sweep(params, spec)
    out = _output_dir(resolved)
    csv_path = out / f"{name}.csv"
    artifacts.write_spectra_csv(csv_path, table)
    artifacts.write_json(out / f"{name}.json", artifacts.spectra_json_doc(
        table, config=resolved, tool_version=__version__, csv_name=csv_path.name))
    print(f"wrote {csv_path} and {csv_path.with_suffix('.json')}")
    return 0


def cmd_sweep(resolved: dict) -> int:
    return _run_sweep(resolved, "sweep")


def cmd_pdh(resolved: dict) -> int:
    return _run_sweep(resolved, "pdh", force_sidebands=True)


def cmd_thermal_scan(resolved: dict) -> int:
    params = build_model(resolved)
    th = resolved["thermal"]
    sc = resolved["scan"]
    try:
        tp = ThermalParams(alpha_th=th["alpha_th"], tau_th=th["tau_th"],
                           coupling_sub=th["coupling_sub"],
                           gamma_per_time=th["gamma_per_time"])
        scan = ScanWaveform(period=sc["period"], amplitude=sc["amplitude"],
                            offset=sc["offset"], n_samples=sc["n_samples"])
        trace = thermal_scan(params, tp, scan, resolved["drive"]["pump_ratio"],
                             n_periods=sc["n_periods"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = _output_dir(resolved)
    csv_path = out / "thermal_scan.csv"
    artifacts.write_thermal_csv(csv_path, trace)
    artifacts.write_json(out / "thermal_scan.json", artifacts.thermal_json_doc(
        trace, config=resolved, tool_version=__version__, csv_name=csv_path.name))
    print(f"wrote {csv_path} and {csv_path.with_suffix('.json')}")
    return 0


def cmd_threshold(resolved: dict) -> int:
    if "cavity" not in resolved:
        raise ConfigError("the 'threshold' subcommand needs the physical "
                          "'cavity' parameter style")
    c = dict(resolved["cavity"])
    p_th_config = c.pop("threshold_power")
    cavity = CavityParams(**c)
    kappa = calibrate_kappa(cavity, threshold_power=p_th_config)
    p_th_back = threshold_power(cavity, kappa)
    residual = abs(p_th_back - p_th_config) / p_th_config
    rates = derive_rates(cavity)
    doc = {
        "schema_version": artifacts.SCHEMA_VERSION,
        "tool": "opasim",
        "tool_version": __version__,
        "kind": "threshold",
        "config": resolved,
        "kappa_per_s": kappa,
        "kappa_normalized": kappa / rates.gamma,
        "threshold_power_config_W": p_th_config,
        "threshold_power_roundtrip_W": p_th_back,
        "roundtrip_relative_residual": residual,
        "gamma_per_s": rates.gamma,
        "gamma_b_per_s": rates.gamma_b,
        "under_coupled": rates.under_coupled,
    }
    out = _output_dir(resolved)
    artifacts.write_json(out / "threshold.json", doc)
    print(f"kappa = {kappa!r} 1/s ({kappa / rates.gamma!r} in gamma units)")
    print(f"threshold power round trip: {p_th_back!r} W "
          f"(configured {p_th_config!r} W, relative residual {residual!r})")
    return 0


def cmd_gain(resolved: dict) -> int:
    params = build_model(resolved)
    if params.pump_ratio >= 1.0:
        raise ConfigError("gain is defined below threshold; set "
                          "drive.pump_ratio < 1")
    doc = {
        "schema_version": artifacts.SCHEMA_VERSION,
        "tool": "opasim",
        "tool_version": __version__,
        "kind": "gain",
        "config": resolved,
        "sigma": params.sigma,
        "theta": params.theta,
        "gain_at_theta": classical_gain(params),
        "gain_amplification": classical_gain(params, 0.0),
        "gain_deamplification": classical_gain(params, math.pi),
    }
    out = _output_dir(resolved)
    artifacts.write_json(out / "gain.json", doc)
    print(f"sigma = {params.sigma!r}")
    print(f"G(theta={params.theta!r}) = {doc['gain_at_theta']!r}")
    print(f"G(0) = {doc['gain_amplification']!r}, "
          f"G(pi) = {doc['gain_deamplification']!r}")
    return 0


def cmd_features(resolved: dict) -> int:
    if resolved["seedless"]:
        raise ConfigError("feature extraction needs a seeded sweep; drop "
                          "'seedless: true'")
    params = build_model(resolved)
    spec = _build_sweep_spec(resolved)
    pumped = extract_features(sweep(params, spec))
    # Baseline: pump off and parametric coupling disabled, the bare cavity.
    baseline = extract_features(
        sweep(replace(params, pump_ratio=0.0, kappa=0.0), spec),
        require_window=False)
    flipped = (pumped.center_slope * baseline.center_slope) < 0.0
    doc = {
        "schema_version": artifacts.SCHEMA_VERSION,
        "tool": "opasim",
        "tool_version": __version__,
        "kind": "features",
        "config": resolved,
        "pumped": {
            "dip_depth": pumped.dip_depth,
            "window_width_fwhm": pumped.window_width_fwhm,
            "window_delta": pumped.window_delta,
            "center_slope": pumped.center_slope,
            "extrema_count": pumped.extrema_count,
        },
        "baseline": {
            "dip_depth": baseline.dip_depth,
            "window_width_fwhm": baseline.window_width_fwhm,
            "center_slope": baseline.center_slope,
            "extrema_count": baseline.extrema_count,
        },
        "gamma_b": params.gamma_b,
        "window_width_over_gamma_b": pumped.window_width_fwhm / params.gamma_b,
        "center_slope_sign_flipped": bool(flipped),
    }
    out = _output_dir(resolved)
    artifacts.write_json(out / "features.json", doc)
    print(f"window present: width = {pumped.window_width_fwhm!r} "
          f"({doc['window_width_over_gamma_b']!r} gamma_b)")
    print(f"center slope {pumped.center_slope!r} vs baseline "
          f"{baseline.center_slope!r} (sign flipped: {flipped})")
    return 0


_COMMANDS = {
    "sweep": cmd_sweep,
    "pdh": cmd_pdh,
    "thermal-scan": cmd_thermal_scan,
    "threshold": cmd_threshold,
    "gain": cmd_gain,
    "features": cmd_features,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opasim",
        description="Simulator for a triple-resonant degenerate OPA cavity.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("sweep", "detuning sweep: reflection/transmission/phase CSV"),
        ("pdh", "sweep with modulation sidebands and the demodulated error column"),
        ("thermal-scan", "triangular cavity scan with the thermo-optic variable"),
        ("threshold", "calibrate the coupling rate from a threshold power"),
        ("gain", "resonant amplification/deamplification gain"),
        ("features", "window width, central slope, extrema of a configured sweep"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="YAML or JSON configuration file")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY.PATH=VALUE",
                       help="override a config leaf (repeatable)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg = apply_overrides(cfg, args.overrides)
        resolved = resolve_config(cfg)
        return _COMMANDS[args.command](resolved)
    except (ConfigError, ValueError) as exc:
        # parameter validation raises ValueError; at the CLI surface every
        # such value came from the configuration
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NonConvergence, MultiStability, SingularResponse,
            AboveThresholdUnstableSeedless) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    except (FeatureAbsent, PeakNotFound) as exc:
        print(f"feature error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
