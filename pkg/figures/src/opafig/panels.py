"""Schema-validated CSV reading and deterministic panel rendering.

Two artifact kinds are understood:

- ``spectra``: columns delta, refl_power, trans_power, phase,
  pump_intracavity, pdh_error.  Each CSV becomes one column of three
  stacked panels (reflection, transmission, phase) against detuning.
- ``thermal``: columns t, scan_value, theta, pump_trans, sub_refl.  Each
  CSV becomes one panel of pump transmission against time with the scan
  ramp overlaid as a dotted line.

The checksum contract: the arrays handed to the plotting calls, in panel
order, are hashed (float64 bytes, concatenated) and written to a manifest
next to the image.  Re-deriving the same hash from the CSVs proves the
figure plots the file contents untouched.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import yaml

SPECTRA_HEADER = ("delta", "refl_power", "trans_power", "phase",
                  "pump_intracavity", "pdh_error")
THERMAL_HEADER = ("t", "scan_value", "theta", "pump_trans", "sub_refl")
KNOWN_SCHEMA_VERSIONS = {1}
KINDS = ("spectra", "thermal")

# plotted columns per kind, in panel order; x first, then y
SPECTRA_PANELS = (("delta", "refl_power"), ("delta", "trans_power"),
                  ("delta", "phase"))
THERMAL_PANELS = (("t", "pump_trans"), ("t", "scan_value"))


class SchemaError(Exception):
    """A CSV or its sidecar does not match a known artifact schema."""


@dataclass(frozen=True)
class PanelSpec:
    """What to render: artifact kind, inputs, captions, layout, output."""

    kind: str
    csv_paths: tuple[str, ...]
    labels: tuple[str, ...]
    rows: int
    cols: int
    output: str
    dpi: int = 150

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown panel kind {self.kind!r}")
        if not self.csv_paths:
            raise ValueError("csv list must not be empty")
        if len(self.labels) != len(self.csv_paths):
            raise ValueError("labels must match the csv list one to one")
        expected = ((3, len(self.csv_paths)) if self.kind == "spectra"
                    else (len(self.csv_paths), 1))
        if (self.rows, self.cols) != expected:
            raise ValueError(f"panel layout {self.rows}x{self.cols} does not "
                             f"fit {len(self.csv_paths)} {self.kind} inputs "
                             f"(expected {expected[0]}x{expected[1]})")


@dataclass(frozen=True)
class RenderResult:
    image_path: str
    manifest_path: str
    checksum: str


def load_panel_spec(path: str | Path) -> PanelSpec:
    doc = yaml.safe_load(Path(path).read_text())
    if not isinstance(doc, dict):
        raise ValueError(f"panel spec {path!r} must hold a mapping")
    try:
        kind = doc["kind"]
        csv_paths = tuple(str(p) for p in doc["csv"])
        output = str(doc["output"])
    except KeyError as exc:
        raise ValueError(f"panel spec is missing required key {exc}") from exc
    labels = tuple(str(v) for v in doc.get("labels", csv_paths))
    layout = doc.get("layout")
    if layout is None:
        rows, cols = ((3, len(csv_paths)) if kind == "spectra"
                      else (len(csv_paths), 1))
    else:
        rows, cols = int(layout[0]), int(layout[1])
    base = Path(path).parent
    csv_paths = tuple(str(base / p) if not Path(p).is_absolute() else p
                      for p in csv_paths)
    return PanelSpec(kind=kind, csv_paths=csv_paths, labels=labels, rows=rows,
                     cols=cols, output=str(output), dpi=int(doc.get("dpi", 150)))


def _check_sidecar(csv_path: Path) -> None:
    sidecar = csv_path.with_suffix(".json")
    if not sidecar.exists():
        return
    try:
        doc = json.loads(sidecar.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"sidecar {sidecar.name} is not valid JSON: {exc}") from exc
    version = doc.get("schema_version")
    if version not in KNOWN_SCHEMA_VERSIONS:
        raise SchemaError(f"{sidecar.name}: unknown schema_version {version!r}")


def read_table(path: str | Path, kind: str) -> dict[str, np.ndarray]:
    """Parse one CSV after validating its header against the kind's schema."""
    expected = SPECTRA_HEADER if kind == "spectra" else THERMAL_HEADER
    csv_path = Path(path)
    _check_sidecar(csv_path)
    with open(csv_path, newline="") as handle:
        reader = csv.reader(handle)
        header = tuple(next(reader))
        if header != expected:
            for i, name in enumerate(expected):
                if i >= len(header) or header[i] != name:
                    got = header[i] if i < len(header) else "<missing>"
                    raise SchemaError(
                        f"{csv_path.name}: column {i} is {got!r}, expected "
                        f"{name!r}")
            raise SchemaError(f"{csv_path.name}: {len(header)} columns, "
                              f"expected {len(expected)}")
        rows = [[float(cell) if cell else np.nan for cell in row]
                for row in reader if row]
    data = np.asarray(rows, dtype=np.float64)
    if data.size == 0:
        raise SchemaError(f"{csv_path.name}: no data rows")
    return {name: data[:, i].copy() for i, name in enumerate(expected)}


def arrays_checksum(arrays) -> str:
    """SHA-256 over the concatenated float64 bytes of the plotted arrays."""
    digest = hashlib.sha256()
    for arr in arrays:
        digest.update(np.ascontiguousarray(arr, dtype=np.float64).tobytes())
    return digest.hexdigest()


def _render_spectra(spec: PanelSpec, tables, plotted):
    fig, axes = plt.subplots(3, len(tables), squeeze=False,
                             figsize=(3.2 * len(tables), 7.0), sharex="col")
    row_names = ("reflection", "transmission", "phase (rad)")
    for j, table in enumerate(tables):
        for i, (xcol, ycol) in enumerate(SPECTRA_PANELS):
            x, y = table[xcol], table[ycol]
            axes[i][j].plot(x, y, lw=1.0)
            plotted.extend((x, y))
            if j == 0:
                axes[i][j].set_ylabel(row_names[i])
        axes[0][j].set_title(spec.labels[j], fontsize=10)
        axes[2][j].set_xlabel("detuning (gamma units)")
    fig.tight_layout()
    return fig


def _render_thermal(spec: PanelSpec, tables, plotted):
    fig, axes = plt.subplots(len(tables), 1, squeeze=False,
                             figsize=(6.4, 2.2 * len(tables)), sharex=True)
    for i, table in enumerate(tables):
        ax = axes[i][0]
        t, trans = table["t"], table["pump_trans"]
        ax.plot(t, trans, lw=1.0)
        plotted.extend((t, trans))
        ramp = ax.twinx()
        t2, scan = table["t"], table["scan_value"]
        ramp.plot(t2, scan, "k:", lw=1.0)
        plotted.extend((t2, scan))
        ramp.set_ylabel("scan")
        ax.set_ylabel("pump transmission")
        ax.set_title(spec.labels[i], fontsize=10)
    axes[-1][0].set_xlabel("time (scan units)")
    fig.tight_layout()
    return fig


def render(spec: PanelSpec) -> RenderResult:
    """Render the panels and write the image plus a checksum manifest.

    The manifest records the SHA-256 of the plotted arrays in panel order
    (x then y per panel, thermal panels contribute the ramp overlay after
    the transmission trace) and the input file names.
    """
    tables = [read_table(p, spec.kind) for p in spec.csv_paths]
    plotted: list[np.ndarray] = []
    if spec.kind == "spectra":
        fig = _render_spectra(spec, tables, plotted)
    else:
        fig = _render_thermal(spec, tables, plotted)
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=spec.dpi)
    plt.close(fig)

    checksum = arrays_checksum(plotted)
    manifest = {
        "kind": spec.kind,
        "image": out.name,
        "inputs": [Path(p).name for p in spec.csv_paths],
        "plotted_arrays_sha256": checksum,
    }
    manifest_path = out.with_name(out.name + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return RenderResult(image_path=str(out), manifest_path=str(manifest_path),
                        checksum=checksum)
