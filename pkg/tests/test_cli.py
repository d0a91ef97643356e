import json
import subprocess
import sys

import pytest

from symket.cli import SCENARIOS, ConfigError, build_parser, main, read_config_file, resolve_config


def run(tmp_path, *argv, name="out.json"):
    out = tmp_path / name
    code = main([*argv, "--output", str(out)])
    return code, out


def test_no_cloning_report(tmp_path):
    code, out = run(tmp_path, "no-cloning", "--a", "0.70710678", "--b", "0.70710678")
    assert code == 0
    report = json.loads(out.read_text())
    assert report["scenario"] == "no-cloning"
    assert report["results"]["fidelity"] == pytest.approx(0.7071068, abs=1e-7)
    names = {c["name"]: c["passed"] for c in report["checks"]}
    assert names["superposition-not-cloned"] is True
    assert report["passed"] is True


def test_no_cloning_basis_state(tmp_path):
    code, out = run(tmp_path, "no-cloning", "--a", "1", "--b", "0")
    report = json.loads(out.read_text())
    assert code == 0
    assert report["results"]["is_clone"] is True
    assert any(c["name"] == "basis-state-cloned" for c in report["checks"])


def test_photon_pair_trace(tmp_path):
    code, out = run(tmp_path, "photon-pair", "--seed", "7")
    assert code == 0
    trace = json.loads(out.read_text())["results"]["collapse_trace"]
    assert [t["location"] for t in trace] == ["1", "2", "1"]
    assert trace[1]["outcome"] == trace[0]["outcome"]
    assert trace[1]["probability"] == 1


def test_disjoint_wells_csv(tmp_path):
    code, out = run(tmp_path, "densities", "--scenario", "disjoint-wells", "--format", "csv", name="w.csv")
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# ")
    assert lines[1] == "x,rho"
    rows = [tuple(map(float, line.split(","))) for line in lines[2:]]
    assert rows[0][0] == pytest.approx(0.0) and rows[-1][0] == pytest.approx(1.0)
    import math
    for x, rho in rows:
        assert abs(rho - 2 * math.sin(math.pi * x) ** 2) < 1e-8


@pytest.mark.parametrize("scenario", SCENARIOS)
def test_deterministic_reports(tmp_path, scenario):
    code1, out1 = run(tmp_path, scenario, "--seed", "3", name="a.json")
    code2, out2 = run(tmp_path, scenario, "--seed", "3", name="b.json")
    assert code1 == code2 == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_float_formatting_15_digits(tmp_path):
    _, out = run(tmp_path, "no-cloning")
    text = out.read_text()
    report = json.loads(text)
    fid = report["results"]["fidelity"]
    assert len(repr(fid).replace(".", "").lstrip("0")) <= 15


def test_invalid_amplitudes_exit_2(tmp_path, capsys):
    code, out = run(tmp_path, "no-cloning", "--a", "0.5", "--b", "0.5")
    assert code == 2
    assert not out.exists()
    assert "invalid config" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus"],
        [],
        ["wrong-clone", "--format", "csv"],
        ["photon-pair", "--statistics", "fermion"],
        ["densities", "--well", "0,1,1"],
        ["densities", "--well", "0,1", "--well", "0,1,2"],
        ["densities", "--well", "0,2,1", "--well", "0,1,2"],
    ],
)
def test_config_errors(tmp_path, argv):
    code, out = run(tmp_path, *argv)
    assert code == 2
    assert not out.exists()


def test_check_failure_exit_1(tmp_path, capsys):
    code, out = run(tmp_path, "disjoint-wells", "--well", "0,1,1", "--well", "0.5,1.5,1")
    assert code == 1
    report = json.loads(out.read_text())
    assert report["passed"] is False
    assert "supports-disjoint" in capsys.readouterr().err
    assert [p.name for p in tmp_path.iterdir()] == ["out.json"]


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nscenario = no-cloning\na = 0.6\nb = 0.8  # trailing\nstatistics = fermion\n")
    args = build_parser().parse_args(["--config", str(cfg), "--statistics", "boson"])
    config = resolve_config(args, environ={})
    assert config.scenario == "no-cloning"
    assert (config.a, config.b) == (0.6, 0.8)
    assert config.statistics.name == "BOSON"


def test_config_file_repeated_wells(tmp_path):
    cfg = tmp_path / "w.cfg"
    cfg.write_text("scenario = disjoint-wells\nwell = 0,1,2\nwell = 2,3,1\ngrid-points = 2001\n")
    assert read_config_file(str(cfg))["well"] == ["0,1,2", "2,3,1"]
    config = resolve_config(build_parser().parse_args(["--config", str(cfg)]), environ={})
    assert config.wells == [(0.0, 1.0, 2), (2.0, 3.0, 1)]
    assert config.grid_points == 2001


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("scenario = no-cloning\ncolour = blue\n")
    with pytest.raises(ConfigError):
        resolve_config(build_parser().parse_args(["--config", str(cfg)]), environ={})


def test_seed_env_fallback():
    args = build_parser().parse_args(["photon-pair"])
    assert resolve_config(args, environ={"SYMKET_SEED": "41"}).seed == 41
    args = build_parser().parse_args(["photon-pair", "--seed", "5"])
    assert resolve_config(args, environ={"SYMKET_SEED": "41"}).seed == 5
    assert resolve_config(build_parser().parse_args(["photon-pair"]), environ={}).seed == 0


def test_stdout_when_no_output(capsys):
    assert main(["wrong-clone", "--statistics", "fermion"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["results"]["fidelity"] == 0.5


def test_module_entry_point(tmp_path):
    out = tmp_path / "r.json"
    proc = subprocess.run(
        [sys.executable, "-m", "symket", "wrong-clone", "--output", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(out.read_text())["passed"] is True


def test_csv_not_written_when_wells_overlap(tmp_path):
    code, out = run(tmp_path, "disjoint-wells", "--well", "0,1,1", "--well", "0.5,1.5,1", "--format", "csv",
                    name="w.csv")
    assert code == 1
    assert not out.exists()
