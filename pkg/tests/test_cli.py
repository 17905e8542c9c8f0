import json
import subprocess
import sys

import pytest

from rabires.cli import run
from rabires.report import read_csv


def _run(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_couplings_csv(capsys):
    code, out, err = _run(capsys, "couplings", "--trap", "hardwall", "--eta", "0.4", "--nmax", "3")
    assert code == 0
    rows = read_csv(out)
    assert rows and set(rows[0]) >= {"n", "n_prime"}


def test_compare_carrier_three_rows(capsys):
    code, out, _ = _run(capsys, "compare", "--figure", "carrier", "--eta", "0.1,0.5,1.0")
    assert code == 0
    assert len(read_csv(out)) == 3


def test_compare_json(capsys):
    code, out, _ = _run(capsys, "compare", "--figure", "ratios", "--eta", "0.1", "--format", "json")
    assert code == 0
    json.loads(out)


def test_scan_negative_range(capsys):
    code, out, _ = _run(
        capsys, "scan", "--axis", "detuning", "--omega-r", "0.2", "--eta", "0.4",
        "--range", "-2.5:2.5", "--steps", "11", "--nmax", "10", "--quiet",
    )
    assert code == 0
    assert len(read_csv(out)) > 0


def test_crossings_and_splitting(capsys):
    code, out, _ = _run(
        capsys, "crossings", "--axis", "rabi", "--eta", "0.1", "--range", "0.8:1.2",
        "--steps", "21", "--nmax", "15", "--format", "json", "--quiet",
    )
    assert code == 0
    json.loads(out)
    code, out, _ = _run(capsys, "splitting", "--n", "0", "--nprime", "1", "--eta", "0.1")
    assert code == 0
    assert read_csv(out)


def test_resonances_dynamics_converge(capsys):
    assert _run(capsys, "resonances", "--trap", "hardwall", "--nmax", "3")[0] == 0
    code, out, _ = _run(
        capsys, "dynamics", "--omega-r", "1", "--eta", "0.1", "--initial", "0,+",
        "--t-final", "10", "--steps", "20", "--frame", "semidressed", "--nmax", "10",
    )
    assert code == 0
    assert out.splitlines()[0].startswith("time,norm,")
    assert _run(capsys, "converge", "--omega-r", "1", "--eta", "0.1", "--N", "20,30")[0] == 0


@pytest.mark.parametrize(
    "argv",
    [
        ["couplings"],
        ["bogus"],
        ["scan", "--axis", "rabi", "--eta", "0.1", "--range", "1"],
        ["couplings", "--eta", "-0.1"],
        ["splitting", "--n", "1", "--nprime", "1", "--omega-r", "1", "--eta", "0.1"],
        ["dynamics", "--eta", "0.1", "--initial", "q,0", "--t-final", "1"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, out, err = _run(capsys, *argv)
    assert code == 2
    assert out == ""
    assert err


def test_help_exit_0(capsys):
    assert run(["--help"]) == 0


def test_out_file(tmp_path, capsys):
    path = tmp_path / "c.csv"
    code, out, _ = _run(capsys, "compare", "--figure", "carrier", "--eta", "0.5", "--out", str(path))
    assert code == 0 and out == ""
    assert len(read_csv(path.read_text())) == 1


def _cli(*argv):
    return subprocess.run([sys.executable, "-m", "rabires", *argv], capture_output=True, text=True)


def test_determinism_and_stream_separation():
    argv = ["scan", "--axis", "rabi", "--eta", "0.1", "--range", "0.5:1.5", "--steps", "15", "--nmax", "10"]
    a, b = _cli(*argv), _cli(*argv)
    assert a.returncode == 0
    assert a.stdout == b.stdout
    assert not any(line.startswith(("INFO", "WARNING", "rabires:")) for line in a.stdout.splitlines())
    bad = _cli("couplings", "--eta", "x")
    assert bad.returncode == 2 and bad.stdout == "" and "error" in bad.stderr
