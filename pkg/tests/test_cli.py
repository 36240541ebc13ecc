import math

import pytest

from tcsync.cli import main, parse_angle, resolve_settings
from tcsync.errors import ConfigError


@pytest.mark.parametrize("text,want", [
    ("pi/4", math.pi / 4),
    ("2pi/3", 2 * math.pi / 3),
    ("-pi/2", -math.pi / 2),
    ("0.05pi", 0.05 * math.pi),
    ("+1.5pi", 1.5 * math.pi),
    ("pi", math.pi),
    ("1.25", 1.25),
    ("0", 0.0),
    (" 5 pi / 12 ", 5 * math.pi / 12),
])
def test_parse_angle_accepts(text, want):
    assert parse_angle(text) == pytest.approx(want)


@pytest.mark.parametrize("text", ["pie", "pi/0", "2x", ""])
def test_parse_angle_rejects(text):
    with pytest.raises(ConfigError):
        parse_angle(text)


def test_resolve_settings_precedence(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text(
        "# comment line\n"
        "alpha0 = 0.052   # inline comment\n"
        "theta2=5pi/12\n"
        "n_max = 80\n")
    s = resolve_settings(str(conf), ["n_max=96", "g2=0.041"])
    assert s["alpha0"] == 0.052
    assert s["theta2"] == pytest.approx(5 * math.pi / 12)
    assert s["n_max"] == 96            # --set wins over the file
    assert s["g2"] == 0.041
    assert s["tau"] == 500.0           # untouched default


def test_resolve_settings_errors(tmp_path):
    with pytest.raises(ConfigError):
        resolve_settings(None, ["bogus_key=3"])
    with pytest.raises(ConfigError):
        resolve_settings(None, ["n_max"])
    bad = tmp_path / "bad.conf"
    bad.write_text("just words\n")
    with pytest.raises(ConfigError):
        resolve_settings(str(bad), None)
    with pytest.raises(ConfigError):
        resolve_settings(str(tmp_path / "missing.conf"), None)


def test_unknown_key_exits_2(capsys):
    rc = main(["evolve", "--set", "nope=1"])
    assert rc == 2
    assert "unknown configuration key" in capsys.readouterr().err


def test_print_config_round_trips(tmp_path, capsys):
    rc = main(["evolve", "--set", "alpha0=0.052", "--set", "theta2=2pi/3",
               "--set", "axis_values=-0.1,0.0,0.1", "--set",
               "renormalize=true", "--print-config"])
    assert rc == 0
    dump = tmp_path / "echo.conf"
    dump.write_text(capsys.readouterr().out)
    s = resolve_settings(str(dump), None)
    assert s["alpha0"] == 0.052
    assert s["theta2"] == pytest.approx(2 * math.pi / 3)
    assert s["axis_values"] == (-0.1, 0.0, 0.1)
    assert s["renormalize"] is True
    assert s["t0"] is None  # unset keys stay unset through the round trip


def test_print_config_short_circuits(capsys):
    rc = main(["evolve", "--set", "alpha0=0.01", "--print-config"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "alpha0 = 0.01" in out
    assert "theta2 = " in out


QUICK = ["--set", "t_end=40", "--set", "tau=20", "--set", "n_max=8",
         "--set", "dt=0.01", "--set", "theta2=5pi/12"]


def test_evolve_writes_trajectory(tmp_path, capsys):
    out = tmp_path / "traj.csv"
    rc = main(["evolve", *QUICK, "--out", str(out)])
    assert rc == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "t,sz1,sz2,n,norm"
    assert len(lines) == 1 + 81  # t_end / sample_interval + initial sample
    assert "wrote" in capsys.readouterr().out


def test_extract_writes_coefficients(tmp_path, capsys):
    out = tmp_path / "coeffs.csv"
    rc = main(["extract", *QUICK, "--set", "t0=30", "--out", str(out)])
    assert rc == 0
    text = out.read_text()
    assert text.startswith("# tcsync coefficients")
    assert "t0=30" in text
    assert "block" in capsys.readouterr().out


def test_extract_before_tau_exits_2(capsys):
    rc = main(["extract", *QUICK, "--set", "t0=10"])
    assert rc == 2
    assert "precedes the drive switch-off" in capsys.readouterr().err


def test_check_negative_verdict_exits_3(tmp_path, capsys):
    # undriven with one qubit down: the only populated block keeps its
    # coefficients in phase, so no mechanism applies
    coeffs = tmp_path / "c.csv"
    rc = main(["extract", *QUICK, "--set", "theta2=0", "--set", "t0=30",
               "--out", str(coeffs)])
    assert rc == 0
    capsys.readouterr()
    rc = main(["check", str(coeffs)])
    out = capsys.readouterr().out
    assert rc == 3
    assert "block 1:" in out
    assert "not synchronized" in out


def test_check_positive_verdict_exits_0(tmp_path, capsys):
    from tcsync.analytic import BalancedVacuumCoeffs, GroundCoeff, \
        save_coefficients_csv
    from tcsync.hamiltonian import SystemParams
    path = tmp_path / "good.csv"
    save_coefficients_csv(
        path,
        [GroundCoeff(0.5), BalancedVacuumCoeffs(1e-5, 0.2j, 0.1, 0.04)],
        SystemParams(), 500.0)
    rc = main(["check", str(path)])
    out = capsys.readouterr().out
    assert rc == 0
    assert "coefficient-vanishing" in out
    assert "overall: synchronized" in out


def test_check_malformed_csv_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("not a coefficient file\n")
    rc = main(["check", str(bad)])
    assert rc == 2
    assert "cannot read coefficients" in capsys.readouterr().err
    rc = main(["check", str(tmp_path / "missing.csv")])
    assert rc == 2


def test_run_failure_exits_1(capsys):
    rc = main(["evolve", "--set", "t_end=100", "--set", "tau=100",
               "--set", "alpha0=0.4", "--set", "n_max=4",
               "--set", "leakage_tol=1e-10"])
    assert rc == 1
    assert "TruncationOverflowError" in capsys.readouterr().err


def test_sweep_end_to_end(tmp_path, capsys):
    out = tmp_path / "grid.csv"
    rc = main(["sweep", "--set", "axis=theta",
               "--set", "axis_values=0.0,0.5",
               "--set", "alpha0_values=0.0",
               "--set", "t_end=60", "--set", "tau=10",
               "--set", "n_max=8", "--set", "window_start=10",
               "--set", "window=45", "--out", str(out)])
    assert rc == 0
    stdout = capsys.readouterr().out
    assert "swept 2 cells" in stdout
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 2 + 2
    # equal-angle row is the symmetry-exact cell
    assert lines[2].split(",")[2] == "1"


def test_module_entry_point():
    import subprocess
    import sys
    proc = subprocess.run([sys.executable, "-m", "tcsync", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "tcsync" in proc.stdout
