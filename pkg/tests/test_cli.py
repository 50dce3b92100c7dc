import csv
import io
import json
import subprocess
import sys

import pytest

from hillevans import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_wave_csv_header_and_round_trip(capsys):
    code, out, _ = run(capsys, "wave", "-E", "0.5", "-c", "0.5", "--branch", "left",
                       "--samples", "33")
    assert code == 0
    table = rows(out)
    assert table[0] == ["z", "u", "du"]
    assert len(table) == 34
    for field in (f for r in table[1:] for f in r):
        assert cli.fmt(float(field)) == field


def test_auto_branch_picks_an_orbit(capsys):
    code, out, _ = run(capsys, "wave", "-E", "6", "-c", "1.45", "--samples", "16")
    assert code == 0 and out.startswith("z,u,du\n")


def test_portrait_header(capsys):
    code, out, _ = run(capsys, "portrait", "-c", "0.5", "--energies", "0.5,1.5",
                       "--grid", "81x81")
    assert code == 0
    assert rows(out)[0] == ["u", "du", "E"]


def test_spectrum_example_lies_on_imaginary_axis(capsys):
    code, out, _ = run(capsys, "spectrum", "--potential", "sine-gordon", "-E", "-0.5",
                       "-c", "0.5", "--branch", "rot+", "--window", "-2:2:-2:2",
                       "--grid", "64x64")
    assert code == 0
    table = rows(out)
    assert table[0] == ["re_lambda", "im_lambda", "theta", "residual"]
    assert len(table) > 1
    assert max(abs(float(r[0])) for r in table[1:]) < 1e-6


def test_krein_example_has_negative_signature(capsys):
    code, out, _ = run(capsys, "krein", "--potential", "phi4", "-E", "-0.082875",
                       "-c", "0.95", "--theta", "3.4", "--interval", "-1.5:1.5")
    assert code == 0
    table = rows(out)
    assert table[0] == ["zeta0", "kappa", "mu_prime", "theta"]
    kappas = [int(r[1]) for r in table[1:]]
    assert kappas.count(-1) >= 1 and kappas.count(1) >= 1


def test_sweep_writes_tracks_and_event_log(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code, _, _ = run(capsys, "sweep", "-E", "6", "-c", "1.45", "--branch", "rot+",
                     "--theta", "4.45:4.60:0.005", "-o", str(out))
    assert code == 0
    assert out.read_text().startswith("track,theta,zeta0,kappa\n")
    events = json.loads((tmp_path / "sweep.csv.events.json").read_text())
    assert [e["kind"] for e in events] == ["HopfOnset"]
    assert set(events[0]) == {"kind", "theta_star", "zeta_star", "bracket"}
    lo, hi = events[0]["bracket"]
    assert lo < events[0]["theta_star"] < hi


def test_output_is_byte_identical(tmp_path, capsys):
    args = ["spectrum", "-E", "0.5", "-c", "0.5", "--branch", "left",
            "--window", "-1:1:-1:1", "--grid", "48x48"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, *args, "-o", str(a))[0] == 0
    assert run(capsys, *args, "-o", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_output_is_identical_with_workers(tmp_path, capsys, monkeypatch):
    args = ["spectrum", "-E", "0.5", "-c", "0.5", "--branch", "left",
            "--window", "-1:1:-1:1", "--grid", "48x48"]
    monkeypatch.setenv("HILLEVANS_WORKERS", "1")
    _, one, _ = run(capsys, *args)
    monkeypatch.setenv("HILLEVANS_WORKERS", "3")
    _, three, _ = run(capsys, *args)
    assert one == three


def test_json_format(capsys):
    code, out, _ = run(capsys, "krein", "-E", "6", "-c", "1.45", "--branch", "rot+",
                       "--theta", "4.36", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc and {"zeta0", "kappa", "mu_prime", "theta"} <= set(doc[0])


def test_config_file_with_flag_override(tmp_path, capsys):
    conf = tmp_path / "run.ini"
    conf.write_text("[run]\ncommand = wave\nE = 0.5\nc = 0.5\nbranch = left\nsamples = 16\n")
    code, out, _ = run(capsys, "--config", str(conf))
    assert code == 0 and len(rows(out)) == 17
    code, out, _ = run(capsys, "--config", str(conf), "--samples", "20")
    assert code == 0 and len(rows(out)) == 21


@pytest.mark.parametrize("argv", [
    ["wave", "-E", "0.5"],
    ["wave", "-E", "-1", "-c", "1.45", "--branch", "left"],
    ["wave", "-E", "0.5", "-c", "1.1", "--potential", "phi4", "--branch", "rot+"],
    ["spectrum", "-E", "0.5", "-c", "0.5", "--window", "1:0:0:1"],
    ["sweep", "-E", "6", "-c", "1.45", "--theta", "5:4:0.01"],
    ["wave", "-E", "0.5", "-c", "0.5", "--potential", "nonsense"],
    ["wave", "-E", "nan", "-c", "0.5"],
])
def test_validation_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert out == "" and err.startswith("error:")


def test_missing_command_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 2


def test_numerical_failure_exits_3_and_names_operation(capsys):
    code, out, err = run(capsys, "wave", "-E", "0", "-c", "0.5", "--branch", "rot+")
    assert code == 3
    assert out == ""
    assert "wave" in err and "SeparatrixDivergence" in err


def test_failed_run_leaves_no_file(tmp_path, capsys):
    target = tmp_path / "w.csv"
    code, _, _ = run(capsys, "wave", "-E", "0", "-c", "0.5", "--branch", "rot+",
                     "-o", str(target))
    assert code == 3
    assert list(tmp_path.iterdir()) == []


def test_atomic_write_replaces_existing(tmp_path):
    target = tmp_path / "f.csv"
    target.write_text("old")
    cli.write_atomic(str(target), "new\n")
    assert target.read_text() == "new\n"
    assert [p.name for p in tmp_path.iterdir()] == ["f.csv"]


def test_fmt_round_trips_and_drops_negative_zero():
    for x in (0.1, -1e-300, 1 / 3, 2.0**60, -0.0):
        assert float(cli.fmt(x)) == x
    assert cli.fmt(-0.0) == "0"


def test_theta_range_is_inclusive():
    th = cli.parse_theta("4.2:5.4:0.005")
    assert th[0] == 4.2 and abs(th[-1] - 5.4) < 1e-12 and th.size == 241


def test_selftest_passes(capsys):
    code, out, _ = run(capsys, "--selftest")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 3 and all(line.startswith("PASS") for line in lines)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hillevans", "wave", "-E", "0.5", "-c",
                           "0.5", "--branch", "left", "--samples", "16"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "z,u,du"
