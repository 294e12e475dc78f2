import json

import pytest

from crossdipole.cli import EXIT_CONFIG, EXIT_FAILURE, EXIT_OK, main
from crossdipole.outputs import read_table


def test_fit_b_prints_json(capsys):
    assert main(["fit-b", "--samples", "200000", "--seed", "1"]) == EXIT_OK
    result = json.loads(capsys.readouterr().out)
    assert result["m0"] == 10.0 and result["m_max"] == 100.0
    assert result["b"] == pytest.approx(60.8, abs=0.5)


def test_fit_b_rejects_an_inverted_annulus(capsys):
    assert main(["fit-b", "--m0", "200"]) == EXIT_CONFIG
    assert "m_max" in capsys.readouterr().err


def test_pattern_table(tmp_path, capsys):
    assert main(["pattern", "--antenna", "y", "--grid", "8", "--out", str(tmp_path)]) == EXIT_OK
    frame = read_table(tmp_path / "pattern-y.csv")
    assert len(frame) == 64
    assert list(frame.columns) == ["theta", "phi", "field", "x", "y", "z"]
    assert main(["pattern", "--antenna", "z", "--grid", "1", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_config_errors_exit_with_two(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "--preset", "fig9-sumrate", "--trials", "0", "--out", str(out)]) == EXIT_CONFIG
    assert "trials" in capsys.readouterr().err

    config = tmp_path / "bad.json"
    config.write_text(json.dumps({"topology": {"m0": 200}}))
    assert main(["run", "--preset", "custom", "--config", str(config), "--out", str(out)]) == EXIT_CONFIG
    assert "m0 < m_max" in capsys.readouterr().err
    assert not out.exists()


def test_unreadable_config_exits_with_one(tmp_path, capsys):
    missing = tmp_path / "missing.json"
    assert main(["run", "--preset", "custom", "--config", str(missing)]) == EXIT_FAILURE
    assert "could not read" in capsys.readouterr().err


def run_fig3(out):
    return main(
        ["run", "--preset", "fig3-pdf-theta", "--trials", "2000", "--seed", "7", "--threads", "1", "--out", str(out)]
    )


def test_run_writes_table_and_sidecar(tmp_path, capsys):
    assert run_fig3(tmp_path) == EXIT_OK
    captured = capsys.readouterr()
    assert "Running fig3-pdf-theta" in captured.err
    assert str(tmp_path / "fig3-pdf-theta.csv") in captured.out

    frame = read_table(tmp_path / "fig3-pdf-theta.csv")
    assert sorted(frame["h"].unique()) == [50.0, 100.0, 200.0, 400.0]
    assert {"theta_bin_center", "density", "analytic_density"} <= set(frame.columns)

    meta = json.loads((tmp_path / "fig3-pdf-theta.meta.json").read_text())
    assert meta["preset"] == "fig3-pdf-theta"
    assert meta["seed"] == 7
    assert meta["config"]["trials"] == 2000
    assert meta["version"].startswith("1.0.0")
    assert {dep["name"] for dep in meta["dependencies"]} >= {"numpy", "scipy", "pandas"}
    assert meta["wall_time_s"] >= 0


def test_same_seed_gives_identical_tables(tmp_path):
    assert run_fig3(tmp_path / "a") == EXIT_OK
    assert run_fig3(tmp_path / "b") == EXIT_OK
    table = "fig3-pdf-theta.csv"
    assert (tmp_path / "a" / table).read_bytes() == (tmp_path / "b" / table).read_bytes()


def test_json_format(tmp_path):
    args = ["run", "--preset", "fig6-gain-standalone", "--trials", "200", "--format", "json", "--out", str(tmp_path)]
    assert main(args) == EXIT_OK
    rows = json.loads((tmp_path / "fig6-gain-standalone.json").read_text())
    assert len(rows) == 2 * 8
    assert {row["antenna"] for row in rows} == {"dipole_z", "dipole_y"}
