import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from ghostpol.cli import main
from ghostpol.scenario import write_sweep_csv
from ghostpol.simulate import CountRecord, SweepResult, paper_preset

SCENARIO_DIR = Path(__file__).parent.parent / "scenarios"
GHOST_BLANK = str(SCENARIO_DIR / "ghost_blank.scn")
GHOST_2CM = str(SCENARIO_DIR / "ghost_limonene_2cm.scn")
CHSH_BARE = str(SCENARIO_DIR / "chsh_bare.scn")


def make_reference_csv(path, phase_deg=25.0):
    """Noiseless high-count fringe so integer rounding is negligible."""
    geometry, apparatus, _ = paper_preset("ghost_blank")
    t = np.radians(np.arange(0, 360, 10.0))
    counts = np.rint(2e9 + 1e9 * np.cos(2 * t - 2 * np.radians(phase_deg)))
    records = tuple(
        CountRecord(float(a), 100, 100, int(c), 1.0)
        for a, c in zip(np.arange(0, 360, 10.0), counts)
    )
    write_sweep_csv(path, SweepResult(geometry, apparatus, None, records))


def test_simulate_writes_deterministic_csv(tmp_path, capsys):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["simulate", GHOST_BLANK, "--out", str(out1)]) == 0
    assert main(["simulate", GHOST_BLANK, "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert "seed 101" in capsys.readouterr().out

    out3 = tmp_path / "c.csv"
    assert main(["simulate", GHOST_BLANK, "--out", str(out3), "--seed", "9"]) == 0
    assert out3.read_bytes() != out1.read_bytes()


def test_fit_reports_reference_phase(tmp_path, capsys):
    csv = tmp_path / "ref.csv"
    make_reference_csv(csv)
    assert main(["fit", str(csv)]) == 0
    out = capsys.readouterr().out
    assert "phase          25.0000 deg" in out


def test_fit_degenerate_channel_fails_cleanly(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    assert main(["simulate", GHOST_BLANK, "--out", str(out)]) == 0
    code = main(["fit", str(out), "--channel", "singles_sample"])
    assert code == 2
    assert capsys.readouterr().err.startswith("E_DATA:")


def test_rotation_from_csv_pairs(tmp_path, capsys):
    blanks, samples = [], []
    for k in range(2):
        b = tmp_path / f"blank{k}.csv"
        s = tmp_path / f"sample{k}.csv"
        assert main(["simulate", GHOST_BLANK, "--out", str(b), "--stream", str(2 * k)]) == 0
        assert main(["simulate", GHOST_2CM, "--out", str(s), "--stream", str(2 * k + 1)]) == 0
        blanks.append(str(b))
        samples.append(str(s))
    report = tmp_path / "rotation.csv"
    assert main(["rotation", "--blank", *blanks, "--sample", *samples,
                 "--out", str(report)]) == 0
    out = capsys.readouterr().out
    assert "rotation" in out and "2 pairs" in out
    value = float(report.read_text().splitlines()[1].split(",")[0])
    assert value == pytest.approx(24.8, abs=1.5)


def test_rotation_single_pair_has_no_sigma(tmp_path, capsys):
    b, s = tmp_path / "b.csv", tmp_path / "s.csv"
    assert main(["simulate", GHOST_BLANK, "--out", str(b)]) == 0
    assert main(["simulate", GHOST_2CM, "--out", str(s), "--stream", "1"]) == 0
    assert main(["rotation", "--blank", str(b), "--sample", str(s)]) == 0
    assert "no repeatability sigma" in capsys.readouterr().out


def test_rotation_mismatched_pairs(tmp_path, capsys):
    b = tmp_path / "b.csv"
    assert main(["simulate", GHOST_BLANK, "--out", str(b)]) == 0
    code = main(["rotation", "--blank", str(b), "--sample", str(b), str(b)])
    assert code == 2
    assert capsys.readouterr().err.startswith("E_VALUE:")


def test_chsh_exact_and_sampled(tmp_path, capsys):
    assert main(["chsh", CHSH_BARE, "--exact"]) == 0
    out = capsys.readouterr().out
    assert "S = 2.390021" in out

    report = tmp_path / "chsh.csv"
    assert main(["chsh", CHSH_BARE, "--repeats", "20", "--out", str(report)]) == 0
    out = capsys.readouterr().out
    assert "20 repeats" in out
    s_value = float(report.read_text().splitlines()[1].split(",")[4])
    assert s_value == pytest.approx(2.39, abs=0.1)


def test_scaling_quick_run(capsys):
    assert main(["scaling", GHOST_BLANK, "--n-targets", "1e3,3e4,1e6",
                 "--repeats", "12"]) == 0
    out = capsys.readouterr().out
    assert "log-log slope vs n" in out


def test_scenario_error_paths(tmp_path, capsys):
    bad = tmp_path / "bad.scn"
    bad.write_text("[geometry]\nmode = ghost\n[apparatus]\nvisibilty = 0.9\n")
    assert main(["simulate", str(bad), "--out", str(tmp_path / "x.csv")]) == 2
    err = capsys.readouterr().err
    assert err.startswith("E_SCENARIO_KEY:") and "line 4" in err

    assert main(["simulate", str(tmp_path / "missing.scn"),
                 "--out", str(tmp_path / "x.csv")]) == 2
    assert capsys.readouterr().err.startswith("E_IO:")

    bad.write_text("[geometry]\nmode = ghost\n[apparatus]\nvisibility = 1.3\n")
    assert main(["fit", str(bad)]) == 2  # not a sweep CSV
    assert capsys.readouterr().err.startswith("E_CSV:")


def test_reproduce_paper_passes(tmp_path, capsys):
    report = tmp_path / "checks.csv"
    code = main(["reproduce-paper", "--out", str(report)])
    out = capsys.readouterr().out
    assert code == 0
    assert "10/10 checks passed" in out
    assert report.exists()


def test_module_entry_point_help():
    result = subprocess.run([sys.executable, "-m", "ghostpol", "--help"],
                            capture_output=True, text=True)
    assert result.returncode == 0
    assert "reproduce-paper" in result.stdout
