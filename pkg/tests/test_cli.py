import csv
import json
from importlib import resources

import jsonschema
import pytest

from pairgen.cli import main

# A cheap JSA configuration: short pump so a coarse grid resolves it.
SMALL_JSA = """
[pump]
duration = "1 ps"

[grid]
points = 256
area_subgrid = 4
area_grid_points = 128
dispersion_nodes = 64
"""


def _schema(name):
    text = resources.files("pairgen").joinpath(f"schemas/{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


@pytest.fixture(scope="module")
def small_cfg(tmp_path_factory):
    p = tmp_path_factory.mktemp("cfg") / "small.toml"
    p.write_text(SMALL_JSA, encoding="utf-8")
    return p


@pytest.fixture(scope="module")
def design_out(tmp_path_factory):
    out = tmp_path_factory.mktemp("run") / "nested" / "design"
    assert main(["design", "--out", str(out)]) == 0
    return out


def test_design_outputs(design_out):
    rep = json.loads((design_out / "design.json").read_text())
    jsonschema.validate(rep, _schema("design"))
    for key in ("diameter_um", "neff_pump", "neff_seed", "ng_seed", "ng_pump", "beta2_seed_ps2km", "beta2_pump_ps2km", "A_um2", "gamma", "gamma_sfwm"):
        assert key in rep
    assert rep["diameter_um"] == pytest.approx(0.790, rel=0.01)
    assert abs(rep["neff_pump"] - rep["neff_seed"]) < 1e-9
    manifest = json.loads((design_out / "manifest.json").read_text())
    jsonschema.validate(manifest, _schema("manifest"))
    assert manifest["outputs"] == ["design.json", "neff_curves.csv"]
    with (design_out / "neff_curves.csv").open(newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["role", "mode", "frequency_THz", "n_eff"]
    assert {r[0] for r in rows[1:]} == {"seed", "pump"}


def test_design_with_other_pump(tmp_path, design_out):
    cfg = tmp_path / "c.toml"
    cfg.write_text('[pump]\nwavelength = "525 nm"\n', encoding="utf-8")
    assert main(["design", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    rep = json.loads((tmp_path / "o" / "design.json").read_text())
    base = json.loads((design_out / "design.json").read_text())
    assert rep["diameter_um"] != pytest.approx(base["diameter_um"], rel=1e-3)


def test_malformed_config_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text('[seed]\npower = 1\n', encoding="utf-8")
    assert main(["design", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "seed.power" in capsys.readouterr().err


def test_no_phasematch_exit_code(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text('[fiber]\nbracket = ["0.9 um", "1.2 um"]\n', encoding="utf-8")
    assert main(["design", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    err = capsys.readouterr().err
    assert "no phasematch" in err and "dn(d_min)" in err


def test_unknown_sweep_key(tmp_path, capsys):
    assert main(["sweep", "--vary", "gamma=1,2", "--out", str(tmp_path)]) == 2
    assert "gamma" in capsys.readouterr().err
    assert main(["sweep", "--out", str(tmp_path)]) == 2


def test_argparse_errors_exit_two():
    with pytest.raises(SystemExit) as info:
        main(["transmogrify"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["design", "--threads", "0"])
    assert info.value.code == 2


def test_raman_outputs(tmp_path):
    out = tmp_path / "raman"
    assert main(["raman", "--out", str(out)]) == 0
    summary = json.loads((out / "noise_summary.json").read_text())
    jsonschema.validate(summary, _schema("noise_summary"))
    assert summary["suppression_ratio"] > 0 and summary["fom"] > 0
    with (out / "noise_sweep.csv").open(newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["P_s_W", "Delta_THz", "sfwm_signal", "sstpdc_signal", "raman_sfwm", "raman_sstpdc", "snr_sfwm", "snr_sstpdc", "fom"]
    assert len(rows) - 1 == 41 * 5
    with (out / "noise_peaks.csv").open(newline="") as fh:
        assert len(list(csv.reader(fh))) - 1 == 41
    # FOM does not depend on detuning
    by_power = {}
    for r in rows[1:]:
        by_power.setdefault(r[0], set()).add(r[-1])
    assert all(len(v) == 1 for v in by_power.values())
    assert (out / "noise_fom.png").stat().st_size > 0


def test_csv_is_rfc4180(design_out):
    raw = (design_out / "neff_curves.csv").read_bytes()
    assert raw.endswith(b"\r\n")
    assert b"\r\n" in raw.split(b"\r\n", 1)[0] + b"\r\n"


def test_jsa_command(tmp_path, small_cfg):
    out = tmp_path / "jsa"
    assert main(["jsa", "--config", str(small_cfg), "--out", str(out), "--csv-max-side", "64"]) == 0
    metrics = json.loads((out / "metrics.json").read_text())
    jsonschema.validate(metrics, _schema("metrics"))
    for key in ("eta2", "eta2_closed_form", "K", "g2", "bandwidth_THz"):
        assert metrics[key] is not None
    assert metrics["csv_stride"] == 4
    with (out / "jsa.csv").open(newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["omega1_THz", "omega2_THz", "re", "im", "abs2"]
    assert len(rows) - 1 == 64 * 64
    assert (out / "jsi.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_sweep_command(tmp_path, small_cfg):
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", str(small_cfg), "--vary", "P_s=1W,2W", "--out", str(out)]) == 0
    with (out / "sweep.csv").open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["P_s"] for r in rows] == ["1W", "2W"]
    assert float(rows[1]["eta2"]) / float(rows[0]["eta2"]) == pytest.approx(2.0, rel=1e-6)
    assert float(rows[1]["K"]) == pytest.approx(float(rows[0]["K"]), rel=1e-9)


def _outputs(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir()) if p.suffix in (".csv", ".json") and p.name != "manifest.json"}


def test_identical_runs_are_bit_identical(tmp_path, small_cfg):
    for tag in ("a", "b"):
        assert main(["jsa", "--config", str(small_cfg), "--out", str(tmp_path / tag / "jsa"), "--threads", "2"]) == 0
        assert main(["raman", "--out", str(tmp_path / tag / "raman")]) == 0
    for sub in ("jsa", "raman"):
        a, b = _outputs(tmp_path / "a" / sub), _outputs(tmp_path / "b" / sub)
        assert a.keys() == b.keys() and len(a) >= 2
        assert a == b
        ma = json.loads((tmp_path / "a" / sub / "manifest.json").read_text())
        mb = json.loads((tmp_path / "b" / sub / "manifest.json").read_text())
        assert ma["config_hash"] == mb["config_hash"]
    assert (tmp_path / "a/jsa/jsi.png").read_bytes() == (tmp_path / "b/jsa/jsi.png").read_bytes()
