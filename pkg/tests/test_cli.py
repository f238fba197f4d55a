import json
import shutil
import subprocess

import pytest

from mhdnudge.cli import main


SMALL = """scenario = u-only-exploratory
n = 32
horizon = 2.0
spinup_max_time = 2.0
sample_every = 5
mask = u-only
"""


def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_missing_config_file_exit_2(tmp_path, capsys):
    assert main(["run", str(tmp_path / "nope.cfg")]) == 2
    assert "config error" in capsys.readouterr().err


def test_invalid_config_exit_2(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "scenario = baseline\nbogus_key = 1\n")
    assert main(["run", cfg]) == 2
    err = capsys.readouterr().err
    assert "bogus_key" in err
    assert "line 2" in err


def test_run_verb(tmp_path, capsys):
    cfg = write_cfg(tmp_path, SMALL + f"outdir = {tmp_path / 'out'}\n")
    assert main(["run", cfg]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["passed"] is True
    assert (tmp_path / "out" / "errors.csv").exists()


def test_seed_override_changes_run(tmp_path, capsys):
    cfg = write_cfg(tmp_path, SMALL + f"outdir = {tmp_path / 'a'}\n")
    assert main(["run", cfg, "--seed", "3", "--outdir", str(tmp_path / "b")]) == 0
    capsys.readouterr()
    saved = (tmp_path / "b" / "config.txt").read_text()
    assert "seed = 3" in saved


def test_determinism_bitwise(tmp_path, capsys):
    cfg = write_cfg(tmp_path, SMALL)
    assert main(["run", cfg, "--outdir", str(tmp_path / "r1")]) == 0
    assert main(["run", cfg, "--outdir", str(tmp_path / "r2")]) == 0
    capsys.readouterr()
    for name in ("trajectory.csv", "errors.csv"):
        a = (tmp_path / "r1" / name).read_bytes()
        b = (tmp_path / "r2" / name).read_bytes()
        assert a == b, name


def test_verify_interpolant_verb(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "scenario = baseline\nn = 32\n"
                    f"outdir = {tmp_path / 'v'}\n")
    assert main(["verify-interpolant", cfg, "--samples", "20"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["kind"] == "spectral"
    assert report["c1"] > 0
    assert (tmp_path / "v" / "interpolant_report.json").exists()


def test_sweep_verb_single_value(tmp_path, capsys):
    cfg = write_cfg(tmp_path, SMALL + f"outdir = {tmp_path / 's'}\n")
    assert main(["sweep", cfg, "--axis", "mu", "--values", "25",
                 "--workers", "1"]) == 0
    out = capsys.readouterr().out
    assert "mu=25" in out
    assert (tmp_path / "s" / "sweep.csv").exists()
    assert (tmp_path / "s" / "sweep.json").exists()


def test_sweep_bad_axis_rejected(tmp_path):
    cfg = write_cfg(tmp_path, SMALL)
    with pytest.raises(SystemExit):
        main(["sweep", cfg, "--axis", "dt", "--values", "1"])


def test_console_script_installed():
    assert shutil.which("mhdnudge") is not None
    out = subprocess.run(["mhdnudge", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for verb in ("run", "sweep", "verify-interpolant", "determining"):
        assert verb in out.stdout
