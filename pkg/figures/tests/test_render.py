import csv
import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from opafig import (PanelSpec, SchemaError, arrays_checksum, load_panel_spec,
                    read_table, render)
from opafig.cli import main

FIXTURES = Path(__file__).parent / "fixtures"

FIG2 = ["fig2_pump_off.csv"]
FIG3 = ["fig3_p000.csv", "fig3_p015.csv", "fig3_p030.csv"]
FIG4 = ["fig4_p020.csv", "fig4_p050.csv", "fig4_p090.csv"]


def _spec(kind, names, out, labels=None):
    paths = tuple(str(FIXTURES / n) for n in names)
    labels = tuple(labels or names)
    rows, cols = (3, len(paths)) if kind == "spectra" else (len(paths), 1)
    return PanelSpec(kind=kind, csv_paths=paths, labels=labels, rows=rows,
                     cols=cols, output=str(out))


def _csv_columns(name):
    with open(FIXTURES / name, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        rows = [[float(c) if c else np.nan for c in r] for r in reader if r]
    data = np.asarray(rows)
    return {col: data[:, i] for i, col in enumerate(header)}


def _reference_checksum(kind, names):
    """Independent recomputation of the plotted-array hash from the CSVs."""
    digest = hashlib.sha256()

    def add(arr):
        digest.update(np.ascontiguousarray(arr, dtype=np.float64).tobytes())

    if kind == "spectra":
        for name in names:
            cols = _csv_columns(name)
            for ycol in ("refl_power", "trans_power", "phase"):
                add(cols["delta"])
                add(cols[ycol])
    else:
        for name in names:
            cols = _csv_columns(name)
            add(cols["t"])
            add(cols["pump_trans"])
            add(cols["t"])
            add(cols["scan_value"])
    return digest.hexdigest()


@pytest.mark.parametrize("kind,names", [
    ("spectra", FIG2),
    ("spectra", FIG3),
    ("thermal", FIG4),
], ids=["pump-off-stack", "nine-panel-grid", "thermal-overlay"])
def test_fixture_sets_render_with_matching_checksum(tmp_path, kind, names):
    result = render(_spec(kind, names, tmp_path / "figure.png"))
    assert Path(result.image_path).exists()
    assert result.checksum == _reference_checksum(kind, names)
    manifest = json.loads(Path(result.manifest_path).read_text())
    assert manifest["plotted_arrays_sha256"] == result.checksum
    assert manifest["inputs"] == names


def test_nine_panel_layout_enforced(tmp_path):
    paths = tuple(str(FIXTURES / n) for n in FIG3)
    with pytest.raises(ValueError, match="layout"):
        PanelSpec(kind="spectra", csv_paths=paths, labels=("a", "b", "c"),
                  rows=2, cols=2, output=str(tmp_path / "x.png"))
    spec = _spec("spectra", FIG3, tmp_path / "grid.png")
    assert (spec.rows, spec.cols) == (3, 3)


def test_rendering_is_deterministic(tmp_path):
    spec1 = _spec("thermal", FIG4, tmp_path / "a.png")
    spec2 = _spec("thermal", FIG4, tmp_path / "b.png")
    r1 = render(spec1)
    r2 = render(spec2)
    assert r1.checksum == r2.checksum
    assert (tmp_path / "a.png").read_bytes() == (tmp_path / "b.png").read_bytes()


def test_schema_mismatch_names_the_column(tmp_path):
    source = (FIXTURES / "fig3_p000.csv").read_text().split("\n")
    source[0] = source[0].replace("trans_power", "transmission")
    bad = tmp_path / "bad.csv"
    bad.write_text("\n".join(source))
    with pytest.raises(SchemaError, match="'transmission'.*'trans_power'"):
        read_table(bad, "spectra")


def test_unknown_schema_version_rejected(tmp_path):
    csv_copy = tmp_path / "copy.csv"
    csv_copy.write_text((FIXTURES / "fig4_p020.csv").read_text())
    (tmp_path / "copy.json").write_text(json.dumps({"schema_version": 99}))
    with pytest.raises(SchemaError, match="schema_version"):
        read_table(csv_copy, "thermal")


def test_thermal_header_rejected_as_spectra():
    with pytest.raises(SchemaError, match="column 0"):
        read_table(FIXTURES / "fig4_p020.csv", "spectra")


def test_arrays_checksum_is_order_sensitive():
    a = np.array([1.0, 2.0])
    b = np.array([3.0, 4.0])
    assert arrays_checksum([a, b]) != arrays_checksum([b, a])


def test_panel_spec_loader_and_cli(tmp_path):
    doc = {
        "kind": "spectra",
        "csv": FIG3,
        "labels": ["pump off", "0.15 Pth", "0.30 Pth"],
        "layout": [3, 3],
        "output": str(tmp_path / "grid.png"),
    }
    spec_path = tmp_path / "panels.yaml"
    import yaml
    spec_path.write_text(yaml.safe_dump(doc))
    # relative csv paths resolve against the spec file location
    spec_doc = yaml.safe_load(spec_path.read_text())
    spec_doc["csv"] = [str(FIXTURES / n) for n in FIG3]
    spec_path.write_text(yaml.safe_dump(spec_doc))

    loaded = load_panel_spec(spec_path)
    assert loaded.labels == ("pump off", "0.15 Pth", "0.30 Pth")
    assert main([str(spec_path)]) == 0
    assert (tmp_path / "grid.png").exists()
    assert (tmp_path / "grid.png.manifest.json").exists()


def test_cli_reports_schema_error(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n1,2\n")
    import yaml
    spec_path = tmp_path / "panels.yaml"
    spec_path.write_text(yaml.safe_dump({
        "kind": "thermal", "csv": [str(bad)],
        "output": str(tmp_path / "img.png"),
    }))
    assert main([str(spec_path)]) == 2
    assert "column 0" in capsys.readouterr().err


def test_cli_missing_spec_file(tmp_path):
    assert main([str(tmp_path / "nope.yaml")]) == 2
