"""Deterministic CSV and JSON artifact writers.

Floats are serialized with repr (shortest round-trip form), keys are
sorted, and no timestamps are embedded, so identical inputs produce
byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

from .params import ModelParams
from .spectra import SpectraTable
from .thermal import ThermalTrace

SCHEMA_VERSION = 1
SPECTRA_COLUMNS = ("delta", "refl_power", "trans_power", "phase",
                   "pump_intracavity", "pdh_error")
THERMAL_COLUMNS = ("t", "scan_value", "theta", "pump_trans", "sub_refl")


def _fmt(value) -> str:
    return repr(float(value))


def write_spectra_csv(path: str | Path, table: SpectraTable) -> None:
    lines = [",".join(SPECTRA_COLUMNS)]
    pdh = table.pdh_error
    for i in range(len(table.delta)):
        row = [
            _fmt(table.delta[i]),
            _fmt(table.refl_power[i]),
            _fmt(table.trans_power[i]),
            _fmt(table.phase[i]),
            _fmt(table.pump_intracavity[i]),
            _fmt(pdh[i]) if pdh is not None else "",
        ]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_thermal_csv(path: str | Path, trace: ThermalTrace) -> None:
    lines = [",".join(THERMAL_COLUMNS)]
    for i in range(len(trace.t)):
        lines.append(",".join([
            _fmt(trace.t[i]),
            _fmt(trace.scan_value[i]),
            _fmt(trace.theta[i]),
            _fmt(trace.pump_trans[i]),
            _fmt(trace.sub_refl[i]),
        ]))
    Path(path).write_text("\n".join(lines) + "\n")


def canonical_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_json(path: str | Path, doc: dict) -> None:
    Path(path).write_text(canonical_json(doc))


def model_params_dict(params: ModelParams) -> dict:
    out = asdict(params)
    out["gamma"] = params.gamma
    out["gamma_b"] = params.gamma_b
    out["sigma"] = params.sigma
    return out


def spectra_json_doc(table: SpectraTable, *, config: dict, tool_version: str,
                     csv_name: str | None = None) -> dict:
    columns: dict[str, list] = {
        "delta": [float(v) for v in table.delta],
        "refl_power": [float(v) for v in table.refl_power],
        "trans_power": [float(v) for v in table.trans_power],
        "phase": [float(v) for v in table.phase],
        "pump_intracavity": [float(v) for v in table.pump_intracavity],
    }
    if table.pdh_error is not None:
        columns["pdh_error"] = [float(v) for v in table.pdh_error]
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": "opasim",
        "tool_version": tool_version,
        "kind": "spectra",
        "config": config,
        "model": model_params_dict(table.params),
        "sweep": asdict(table.spec),
        "data_csv": csv_name,
        "columns": columns,
    }


def thermal_json_doc(trace: ThermalTrace, *, config: dict, tool_version: str,
                     csv_name: str | None = None) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": "opasim",
        "tool_version": tool_version,
        "kind": "thermal",
        "config": config,
        "model": model_params_dict(trace.params),
        "thermal": asdict(trace.thermal),
        "scan": asdict(trace.scan),
        "n_periods": trace.n_periods,
        "data_csv": csv_name,
        "column_names": list(THERMAL_COLUMNS),
    }
