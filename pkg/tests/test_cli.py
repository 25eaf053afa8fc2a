"""End-to-end CLI behaviour: exit codes, CSV schemas, determinism, figures."""

import numpy as np
import pytest

from wsteady.cli import main
from wsteady.reporting import TRAJECTORY_COLUMNS


def write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_simulate_rate_writes_csv_and_figure(tmp_path, capsys):
    cfg = write_config(tmp_path, "t_end = 50\n")
    out = tmp_path / "traj.csv"
    assert main(["simulate", "--config", str(cfg), "--output", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "method=rate" in stdout and "final_fidelity=" in stdout
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# purity = sum of squared ground-state populations")
    assert lines[1] == ",".join(TRAJECTORY_COLUMNS)
    first = lines[2].split(",")
    assert len(first) == len(TRAJECTORY_COLUMNS)
    assert first[0] == "0"
    assert (tmp_path / "traj.png").exists()


def test_simulate_no_plot_skips_figure(tmp_path):
    cfg = write_config(tmp_path, "t_end = 10\n")
    out = tmp_path / "traj.csv"
    assert main(["simulate", "--config", str(cfg), "--output", str(out), "--no-plot"]) == 0
    assert out.exists()
    assert not (tmp_path / "traj.png").exists()


def test_simulate_is_deterministic(tmp_path):
    cfg = write_config(tmp_path, "t_end = 50\ninitial = haar\nseed = 3\n")
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["simulate", "--config", str(cfg), "--output", str(out1), "--no-plot"]) == 0
    assert main(["simulate", "--config", str(cfg), "--output", str(out2), "--no-plot"]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    # a different seed must change the trajectory
    cfg2 = write_config(tmp_path, "t_end = 50\ninitial = haar\nseed = 4\n", name="run2.cfg")
    out3 = tmp_path / "c.csv"
    assert main(["simulate", "--config", str(cfg2), "--output", str(out3), "--no-plot"]) == 0
    assert out1.read_bytes() != out3.read_bytes()


def test_simulate_both_writes_two_files(tmp_path, capsys):
    cfg = write_config(tmp_path, "method = both\nt_end = 30\n")
    out = tmp_path / "traj.csv"
    assert main(["simulate", "--config", str(cfg), "--output", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "method=rate" in stdout and "method=full_time_dependent" in stdout
    assert (tmp_path / "traj.rate.csv").exists()
    assert (tmp_path / "traj.full_time_dependent.csv").exists()
    assert not out.exists()  # only the suffixed files are written
    assert (tmp_path / "traj.png").exists()


def test_exit_2_on_bad_configs(tmp_path):
    out = tmp_path / "x.csv"
    for text in ("t_end = 0\n", "bogus_key = 1\n", "preset = nosuch\n",
                 "kappa = 0.1\nkappa = 0.2\n", "omega = not_a_number\n"):
        cfg = write_config(tmp_path, text)
        assert main(["simulate", "--config", str(cfg), "--output", str(out)]) == 2


def test_exit_2_on_missing_required_argument():
    assert main(["simulate"]) == 2


def test_exit_2_on_fit_problems(tmp_path):
    assert main(["fit", "--input", str(tmp_path / "missing.csv")]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    assert main(["fit", "--input", str(bad)]) == 2


def test_weak_field_warning_and_strict_failure(tmp_path, capsys):
    cfg = write_config(tmp_path, "omega = 0.5\nt_end = 10\ndt = 0.01\n")
    out = tmp_path / "x.csv"
    assert main(["simulate", "--config", str(cfg), "--output", str(out), "--no-plot"]) == 0
    assert "warning: weak-field" in capsys.readouterr().err
    assert main(["simulate", "--config", str(cfg), "--output", str(out),
                 "--no-plot", "--strict"]) == 3


def test_equal_active_detunings_always_exit_3(tmp_path, capsys):
    cfg = write_config(tmp_path, "delta3 = 1.0\nt_end = 10\n")  # collides with delta2
    out = tmp_path / "x.csv"
    assert main(["simulate", "--config", str(cfg), "--output", str(out)]) == 3
    assert "weak-field" in capsys.readouterr().err


def test_exit_4_on_step_rejection(tmp_path, capsys):
    cfg = write_config(tmp_path, "dt = 5000\nt_end = 10000\n")
    out = tmp_path / "x.csv"
    assert main(["simulate", "--config", str(cfg), "--output", str(out)]) == 4
    assert "numerical failure" in capsys.readouterr().err


def test_exit_4_on_degenerate_parameters(tmp_path):
    cfg = write_config(tmp_path, "kappa = 0\ngamma = 0\ndelta3 = 1.7320508075688772\n"
                                 "t_end = 10\n")
    out = tmp_path / "x.csv"
    assert main(["simulate", "--config", str(cfg), "--output", str(out)]) == 4


def test_rates_dump_and_comparison(tmp_path, capsys):
    out = tmp_path / "rates.csv"
    assert main(["rates", "--output", str(out), "--compare-closed-form"]) == 0
    stdout = capsys.readouterr().out
    assert "pairs=18" in stdout
    lines = out.read_text().splitlines()
    assert lines[0].startswith("dest\\source,000,s11")
    assert len(lines) == 9
    compare = (tmp_path / "rates.compare.csv").read_text().splitlines()
    assert compare[0] == ("source,dest,numeric,closed_as_written,closed_corrected,"
                          "rel_err_as_written,rel_err_corrected,note")
    assert len(compare) == 19
    assert (tmp_path / "rates.png").exists()


def test_sweep_csv_schema(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--axis", "cooperativity", "--from", "50", "--to", "100",
                 "--points", "2", "--output", str(out), "--no-plot"]) == 0
    stdout = capsys.readouterr().out
    assert "sweep axis=cooperativity points=2 failed=0" in stdout
    lines = out.read_text().splitlines()
    assert lines[0] == "axis,value,fidelity,purity"
    assert len(lines) == 3
    assert lines[1].startswith("cooperativity,50,")


def test_sweep_rejects_bad_range(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--axis", "cooperativity", "--from", "100", "--to", "50",
                 "--points", "2", "--output", str(out), "--no-plot"]) == 2


def test_fit_roundtrip(tmp_path, capsys):
    csv = tmp_path / "sweep.csv"
    rows = ["axis,value,fidelity,purity"]
    for c in (25.0, 50.0, 100.0):
        rows.append(f"cooperativity,{c},{1.0 - 5.0 / c},0.9")
    rows.append("cooperativity,nan,nan,nan")  # skipped
    csv.write_text("\n".join(rows) + "\n")
    assert main(["fit", "--input", str(csv)]) == 0
    stdout = capsys.readouterr().out
    assert stdout.startswith("a=5 ")
    assert "points=3" in stdout


def test_fit_of_generated_sweep(tmp_path, capsys):
    out = tmp_path / "coop.csv"
    assert main(["sweep", "--axis", "cooperativity", "--from", "50", "--to", "150",
                 "--points", "3", "--output", str(out), "--no-plot"]) == 0
    capsys.readouterr()
    assert main(["fit", "--input", str(out)]) == 0
    stdout = capsys.readouterr().out
    a = float(stdout.split()[0].split("=")[1])
    assert 3.0 < a < 9.0