import json
import subprocess
import sys

import pytest

from zermelo.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_HYPOTHESIS, EXIT_OK, main
from zermelo.scenario import ConfigError, load_scenario, parse_scenario, shipped_scenarios

SHIPPED = shipped_scenarios()


def test_shipped_names():
    assert {"funk_like_disk", "sphere_quadric", "squared_wind", "linear_constant_wind", "parabola_negative"} <= set(SHIPPED)


def test_funk_like_disk(tmp_path, capsys):
    assert main(["verify", str(SHIPPED["funk_like_disk"]), "--csv-dir", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "RESULT PASS" in out
    rows = (tmp_path / "funk_like_disk.csv").read_text().splitlines()
    header = rows[0].split(",")
    assert header[:3] == ["level", "x1", "x2"] and "F_grad" in header
    by_level = {}
    for r in rows[1:]:
        vals = r.split(",")
        by_level.setdefault(vals[0], []).append(float(vals[header.index("F_grad")]))
    assert len(by_level) == 7
    for vals in by_level.values():
        assert max(vals) - min(vals) < 1e-9


def test_sphere_quadric(capsys):
    assert main(["verify", str(SHIPPED["sphere_quadric"]), "--levels", "3", "--samples", "6"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "phi" in out and "RESULT PASS" in out


def test_non_homothetic_wind_exit_code(capsys):
    assert main(["verify", str(SHIPPED["squared_wind"])]) == EXIT_HYPOTHESIS
    assert "hypothesis failure" in capsys.readouterr().out


@pytest.mark.parametrize("name", ["linear_constant_wind", "parabola_negative"])
def test_remaining_shipped(name):
    assert main(["verify", str(SHIPPED[name]), "--levels", "3", "--samples", "6"]) == EXIT_OK


@pytest.mark.parametrize(
    "data",
    [
        {"space": {"dim": 2, "chart": "mercator"}},
        {"space": {"dim": 2}, "wind": {"kind": "vortex"}},
        {"space": {"dim": 2}, "function": {"builtin": "cubic"}},
        {"space": {"dim": 2}, "function": {"expression": "x1 +"}},
        {"space": {"dim": 2}, "hypersurface": {"entry": "torus"}},
        {"space": {"dim": 2}, "tolerances": {"bogus": 1.0}},
        {"wind": {"kind": "zero"}},
    ],
)
def test_config_errors(data, tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    assert main(["verify", str(path)]) == EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().out


def test_invalid_json_and_missing_file(tmp_path):
    bad = tmp_path / "broken.json"
    bad.write_text("{ not json")
    assert main(["verify", str(bad)]) == EXIT_CONFIG
    assert main(["verify", str(tmp_path / "missing.json")]) == EXIT_CONFIG
    with pytest.raises(ConfigError):
        parse_scenario([1, 2])


def test_csv_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        d.mkdir()
        args = ["verify", str(SHIPPED["funk_like_disk"]), "--levels", "3", "--samples", "5", "--seed", "4"]
        assert main(args + ["--csv-dir", str(d)]) == EXIT_OK
    assert (a / "funk_like_disk.csv").read_bytes() == (b / "funk_like_disk.csv").read_bytes()


def test_seed_changes_points_not_verdicts(tmp_path):
    outs = []
    for seed in ("1", "2"):
        d = tmp_path / seed
        d.mkdir()
        args = ["verify", str(SHIPPED["parabola_negative"]), "--levels", "3", "--samples", "5", "--seed", seed]
        assert main(args + ["--csv-dir", str(d)]) == EXIT_OK
        outs.append((d / "parabola_negative.csv").read_bytes())
    assert outs[0] != outs[1]


def test_selftest(capsys):
    assert main(["selftest"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("PASS") == 7 and "FAIL" not in out


def test_selftest_with_impossible_tolerance(capsys):
    assert main(["selftest", "--tol-abs", "1e-15", "--tol-rel", "1e-15"]) == EXIT_FAIL
    assert "FAIL isoparametric criteria" in capsys.readouterr().out


def test_tight_tolerance_fails_scenario(capsys):
    code = main(["verify", str(SHIPPED["sphere_quadric"]), "--levels", "3", "--samples", "6",
                 "--tol-abs", "1e-18", "--tol-rel", "1e-18"])
    assert code == EXIT_FAIL


def test_expr_check(capsys):
    assert main(["expr-check", "((x1))^2 - x2"]) == EXIT_OK
    assert capsys.readouterr().out.splitlines()[0] == "x1^2 - x2"
    assert main(["expr-check", "(x1 + x2"]) == EXIT_CONFIG
    assert "column 9" in capsys.readouterr().out


def test_bad_override():
    assert main(["verify", str(SHIPPED["funk_like_disk"]), "--levels", "1"]) == EXIT_CONFIG


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "zermelo", "expr-check", "x1*x2"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("x1 * x2")


def test_load_scenario_roundtrip():
    sc = load_scenario(SHIPPED["sphere_quadric"])
    assert sc.space.dim == 3 and sc.space.curvature == 1.0
    assert sc.Q_ambient.shape == (4, 4)
