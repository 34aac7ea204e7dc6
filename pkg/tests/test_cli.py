import csv
import math
import subprocess
import sys
import time
from dataclasses import fields

import pytest

from mixadc_doa.cli import EXIT_CONFIG, EXIT_NUMERIC, ConfigError, RunConfig, build_parser, main, parse_config


def test_empty_file_gives_defaults(tmp_path):
    p = tmp_path / "empty.toml"
    p.write_text("")
    cfg = parse_config(p)
    assert cfg == RunConfig()
    assert (cfg.num_elements, cfg.num_snapshots, cfg.spacing_wavelengths) == (128, 32, 0.5)
    assert (cfg.gamma_db, cfg.kappa, cfg.bits_low, cfg.theta_deg) == (0.0, 0.25, 2, [30.0])
    assert cfg.power_model().P_mix == pytest.approx(30.3e-3)


def test_kappa_out_of_range_names_invariant(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text("kappa = 1.5\n")
    with pytest.raises(ConfigError, match=r"kappa ∈ \[0,1\]") as exc:
        parse_config(p)
    assert exc.value.key == "kappa"


def test_grazing_angle_rejected():
    with pytest.raises(ConfigError, match="90"):
        parse_config(None, {"theta_deg": [90.0]})


def test_unknown_key_and_type_errors(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text("kapa = 0.5\n")
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config(p)
    p.write_text('num_elements = "many"\n')
    with pytest.raises(ConfigError, match="expected int") as exc:
        parse_config(p)
    assert exc.value.key == "num_elements"


def test_flag_overrides_file(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text("gamma_db = 0.0\nnum_elements = 64\n")
    cfg = parse_config(p, {"gamma_db": 10.0})
    assert cfg.gamma_db == 10.0 and cfg.num_elements == 64


def test_help_documents_every_key(capsys):
    with pytest.raises(SystemExit):
        build_parser().parse_args(["crlb", "--help"])
    out = capsys.readouterr().out
    for f in fields(RunConfig):
        assert "--" + f.name.replace("_", "-") in out
        if f.metadata.get("unit"):
            assert f"[{f.metadata['unit']}]" in out


def test_crlb_runs_fast(capsys, tmp_path):
    t0 = time.perf_counter()
    assert main(["crlb", "--kappa", "1", "--csv", str(tmp_path / "c.csv")]) == 0
    assert time.perf_counter() - t0 < 1.0
    out = capsys.readouterr().out
    assert "CRLB" in out and "0.0000 dB" in out
    row = list(csv.DictReader(open(tmp_path / "c.csv")))[0]
    assert 0 < float(row["crlb_deg2"]) < math.inf


def test_crlb_subprocess_exit_codes(tmp_path):
    ok = subprocess.run([sys.executable, "-m", "mixadc_doa.cli", "crlb"], capture_output=True, text=True)
    assert ok.returncode == 0
    bad = subprocess.run([sys.executable, "-m", "mixadc_doa.cli", "crlb", "--kappa", "1.5"],
                         capture_output=True, text=True)
    assert bad.returncode == EXIT_CONFIG
    lines = bad.stderr.strip().splitlines()
    assert len(lines) == 1 and lines[0].startswith("error kind=config key=kappa ")


def test_numerical_failure_exit_code(capsys, tmp_path):
    # a 60 degree grid has too few points to resolve two sources
    code = main(["spectrum", "--theta-deg", "-45", "30", "--num-elements", "8", "--grid-step-deg", "60",
                 "--output-dir", str(tmp_path)])
    assert code == EXIT_NUMERIC
    err = capsys.readouterr().err.strip().splitlines()
    assert err == ["error kind=numerical message='found 1 local maxima, need 2'"]


def test_zero_snr_is_a_config_error(capsys):
    assert main(["crlb", "--gamma-db", "-4000"]) == EXIT_CONFIG
    assert "gamma > 0" in capsys.readouterr().err


def test_perf_loss_kappa_one_row(tmp_path, capsys):
    assert main(["perf-loss", "--output-dir", str(tmp_path), "--kappa-list", "0.5", "1"]) == 0
    rows = list(csv.DictReader(open(tmp_path / "perf_loss.csv")))
    assert {float(r["eta_pl_dB"]) for r in rows if float(r["kappa"]) == 1.0} == {0.0}
    assert all(float(r["eta_pl_dB"]) > 0 for r in rows if float(r["kappa"]) == 0.5)


def test_energy_reports_optimum(tmp_path, capsys):
    assert main(["energy", "--output-dir", str(tmp_path)]) == 0
    last = [l for l in capsys.readouterr().out.splitlines() if l.startswith("optimal")]
    assert last in (["optimal low-resolution bits: 2"], ["optimal low-resolution bits: 3"])


def test_reproduce_fig4_argmax(tmp_path):
    assert main(["reproduce", "fig4", "--output-dir", str(tmp_path)]) == 0
    rows = list(csv.DictReader(open(tmp_path / "fig4_ee.csv")))
    for k in {r["kappa"] for r in rows}:
        sel = [r for r in rows if r["kappa"] == k]
        best = max(sel, key=lambda r: float(r["ee_per_deg_per_W"]))
        assert int(best["b"]) in (2, 3)


def test_output_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("MIXADC_DOA_OUTPUT_DIR", str(tmp_path / "env"))
    assert main(["spectrum", "--num-elements", "16"]) == 0
    assert (tmp_path / "env" / "spectrum.csv").exists()


def test_simulate_is_reproducible(tmp_path):
    args = ["simulate", "--num-elements", "16", "--trials", "20", "--workers", "1", "--kappa", "0.5"]
    assert main(args + ["--output-dir", str(tmp_path / "a")]) == 0
    assert main(args + ["--output-dir", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "simulate.csv").read_bytes() == (tmp_path / "b" / "simulate.csv").read_bytes()
