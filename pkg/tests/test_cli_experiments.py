import csv
import io
import json
from pathlib import Path

import pytest

from gbsmit.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, main
from gbsmit.experiments import ConfigError, run, validate_config
from gbsmit.sampling import child_seed

GOLDEN = Path(__file__).parent / "golden"


def run_cli(tmp_path, *args, config=None):
    argv = list(args)
    if config is not None:
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config))
        argv += ["--config", str(path)]
    return main(argv)


@pytest.mark.parametrize("name", ["table1", "table2"])
def test_golden_files(tmp_path, name):
    out = tmp_path / f"{name}.csv"
    assert main([name, "--out", str(out)]) == EXIT_OK
    assert out.read_text() == (GOLDEN / f"{name}.csv").read_text()


def test_deterministic_runs_are_byte_identical(tmp_path):
    for fmt in ("csv", "json"):
        a, b = tmp_path / f"a.{fmt}", tmp_path / f"b.{fmt}"
        main(["table1", "--format", fmt, "--out", str(a)])
        main(["table1", "--format", fmt, "--out", str(b), "--threads", "3"])
        assert a.read_bytes() == b.read_bytes()


def test_csv_and_json_agree(tmp_path):
    c, j = tmp_path / "t.csv", tmp_path / "t.json"
    main(["table2", "--out", str(c)])
    main(["table2", "--format", "json", "--out", str(j)])
    rows = list(csv.reader(io.StringIO(c.read_text())))
    data = json.loads(j.read_text())
    assert rows[0] == data["columns"]
    assert data["experiment"] == "table2"
    for crow, jrow in zip(rows[1:], data["rows"]):
        for cv, jv in zip(crow, jrow):
            assert abs(float(cv) - round(jv, 6)) < 1e-12


def test_table1_spot_values():
    t = run("table1")
    rows = {r[0]: r for r in t.rows}
    cols = t.columns
    assert rows["[3,3]"][cols.index("extrap_eps_0.2")] == pytest.approx(0.0770, abs=5e-5)
    assert rows["[3,3]"][cols.index("imp_extrap_eps_0.2")] == pytest.approx(0.0781, abs=5e-5)
    assert rows["[6,6]"][cols.index("extrap_eps_0.5")] == pytest.approx(0.0068, abs=5e-5)
    assert rows["[6,6]"][cols.index("imp_extrap_eps_0.5")] == pytest.approx(0.0037, abs=5e-5)


def test_table1_zero_loss_override():
    t = run("table1", {"epsilons": [0.0]})
    for row in t.rows:
        assert row[2] == pytest.approx(row[1], abs=1e-12)
        assert row[3] == pytest.approx(row[1], abs=1e-12)


def test_table2_spot_values():
    t = run("table2", {"epsilons": [0.6, 0.8]})
    by_eps = {r[0]: r for r in t.rows}
    assert by_eps[0.8][t.columns.index("cutoff_7_r_0.5")] == pytest.approx(0.049440, abs=5e-7)
    assert by_eps[0.6][t.columns.index("cutoff_10_r_1")] == pytest.approx(2.555229, abs=5e-6)


def test_table3_small_run_reproducible():
    cfg = {"trials": 3, "N": 2000, "epsilons": [0.2, 0.5], "seed": 9}
    a, b = run("table3", cfg), run("table3", cfg, threads=2)
    assert a.rows == b.rows
    assert a.meta["row_seeds"] == [child_seed(9, 0), child_seed(9, 1)]
    assert len(a.meta["trials"]["0.2"]["no1"]) == 3
    assert a.meta["trials"]["0.5"]["trial_seeds"][2] == child_seed(child_seed(9, 1), 2)
    assert a.to_json() == b.to_json()


def test_fig2_single_exact_trial():
    t = run("fig2", {"trials": 1, "N": None})
    assert t.column("value")[0] == pytest.approx(0.2367, abs=5e-5)
    assert t.column("seed")[0] == str(child_seed(0, 0))


def test_fig3_zero_noise():
    t = run("fig3", {"trials": 2, "loss_std": 0.0})
    assert t.column("value") == pytest.approx([0.23668275] * 2, abs=1e-8)
    assert sum(t.meta["histogram"]["counts"]) == 2


def test_table4_leading_rows():
    t = run("table4", {"epsilons": [0.0, 0.1]})
    zero, one = t.rows
    assert zero[1:] == pytest.approx([0.058419] * 4, abs=5e-7)
    assert one[1:4] == pytest.approx([0.040659, 0.058371, 0.058406], abs=5e-7)


def test_fig4_orbits():
    t = run("fig4", {"epsilons": [0.1], "max_photons": 4})
    assert t.column("orbit") == ["[vacuum]", "[1]", "[11]", "[111]", "[1111]"]
    assert t.column("lossless")[4] == pytest.approx(0.058419, abs=5e-7)


def test_custom_tmsv():
    t = run("custom", {"r": 1.0, "pattern": [1, 1], "epsilon": 0.2, "c": [1.0, 1.2, 1.4, 1.6, 1.8], "cutoff": 10})
    row = dict(zip(t.columns, t.rows[0]))
    assert row["lossless"] == pytest.approx(0.243596, abs=5e-7)
    assert row["extrapolation"] == pytest.approx(0.2429, abs=5e-5)
    assert row["improved_extrapolation"] == pytest.approx(row["lossless"], abs=1e-9)
    assert row["loss_cancellation"] == pytest.approx(0.243597, abs=5e-7)


def test_custom_graph_orbit():
    graph = {"nodes": 4, "edges": [[0, 1], [1, 2], [2, 3], [3, 0]]}
    t = run("custom", {"graph": graph, "c_graph": 0.3, "orbit": [1, 1], "epsilon": 0.1, "cutoff": 4})
    row = dict(zip(t.columns, t.rows[0]))
    assert row["extrapolation"] == pytest.approx(row["lossless"], abs=1e-3)
    assert row["loss_cancellation"] == pytest.approx(row["lossless"], abs=1e-3)


def test_config_validation():
    assert validate_config("table1", None)["r"] == 1.0
    for exp, bad in [
        ("table1", {"bogus": 1}),
        ("table1", {"r": "one"}),
        ("table2", {"cutoffs": [7.5]}),
        ("fig2", {"trials": True}),
        ("nope", {}),
    ]:
        with pytest.raises(ConfigError):
            validate_config(exp, bad)
    with pytest.raises(ConfigError):
        run("table1", {"epsilons": [0.6]})
    with pytest.raises(ConfigError):
        run("table4", {"c_graph": 0.5, "epsilons": [0.1]})
    with pytest.raises(ConfigError):
        run("custom", {"r": 1.0})


def test_cli_exit_codes(tmp_path, capsys):
    assert run_cli(tmp_path, "table1", config={"unknown": 1}) == EXIT_CONFIG
    assert run_cli(tmp_path, "table1", "--seed", "4") == EXIT_CONFIG
    assert run_cli(tmp_path, "fig2", "--seed", "-1") == EXIT_CONFIG
    assert run_cli(tmp_path, "table1", "--threads", "0") == EXIT_CONFIG
    assert main(["not-an-experiment"]) == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["table1", "--config", str(bad)]) == EXIT_CONFIG
    pole = {"r": 8.0, "pattern": [0, 0], "epsilon": 0.4999999, "c": [1.0, 2.0]}
    assert run_cli(tmp_path, "custom", config=pole) == EXIT_NUMERIC
    assert "pole" in capsys.readouterr().err
    assert run_cli(tmp_path, "custom", config={"r": 30.0, "pattern": [0, 0]}) == EXIT_CONFIG


def test_cli_stdout_and_seed(tmp_path, capsys):
    assert run_cli(tmp_path, "fig2", "--seed", "11", "--format", "json", config={"trials": 3, "N": 1000}) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["meta"]["config"]["seed"] == 11
    assert [r[1] for r in data["rows"]] == [str(child_seed(11, t)) for t in range(3)]
