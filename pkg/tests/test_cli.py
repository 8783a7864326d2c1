import json
import subprocess
import sys

import numpy as np
import pytest

from tdcshell import cli


def run_cli(args):
    return cli.main([str(a) for a in args])


def test_benchmark_single_flag(tmp_path, capsys):
    out = tmp_path / "run"
    rc = run_cli(["--case", "scordelis_lo", "--p", "2", "--n", "2", "--out", out])
    assert rc == 0
    text = capsys.readouterr().out
    assert "u_z_max" in text and "0.3024" in text
    assert (out / "convergence.csv").exists()
    assert (out / "summary.json").exists()
    summary = json.loads((out / "summary.json").read_text())
    assert summary["rows"][0]["p"] == 2
    assert summary["config"]["case"] == "scordelis_lo"


def test_every_case_runs_with_one_flag(tmp_path):
    for case in ("scordelis_lo", "hyperbolic_paraboloid", "flower"):
        rc = run_cli(["--case", case, "--p", "2", "--n", "2",
                      "--out", tmp_path / case])
        assert rc == 0


def test_csv_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run_cli(["--case", "flower", "--p", "2", "--n", "2,4", "--out", out]) == 0
    assert (a / "convergence.csv").read_bytes() == (b / "convergence.csv").read_bytes()


def test_sweep_has_order_column(tmp_path):
    out = tmp_path / "sweep"
    rc = run_cli(["--case", "flower", "--p", "2,3", "--n", "2,4", "--out", out])
    assert rc == 0
    lines = (out / "convergence.csv").read_text().splitlines()
    assert len(lines) == 1 + 4
    header = lines[0].split(",")
    i_order = header.index("order_force")
    # second row of each p has an observed order entry
    assert lines[2].split(",")[i_order] != ""
    assert lines[1].split(",")[i_order] == ""


def test_custom_problem_file(tmp_path):
    cfgfile = tmp_path / "problem.json"
    cfgfile.write_text(json.dumps({
        "name": "plate_demo",
        "geometry": {"kind": "plate", "lx": 1.0, "ly": 1.0},
        "material": {"E": 200.0, "nu": 0.3, "thickness": 0.02},
        "load_f": [0.0, 0.0, -1e-3],
        "edges": {
            "r_min": {"constraints": [["u", "x"], ["u", "y"], ["u", "z"],
                                       ["w", "x"], ["w", "y"]]},
            "r_max": "free", "s_min": "free", "s_max": "free"},
        "p": 2, "n": 3}))
    out = tmp_path / "custom"
    rc = run_cli(["--problem", cfgfile, "--out", out])
    assert rc == 0
    assert (out / "problem.json").exists()  # config copied for provenance
    rows = json.loads((out / "summary.json").read_text())["rows"]
    assert rows[0]["case"] == "plate_demo"
    assert rows[0]["energy"] > 0


def test_flag_overrides_config(tmp_path):
    cfgfile = tmp_path / "cfg.json"
    cfgfile.write_text(json.dumps({"case": "scordelis_lo", "p": 5, "n": 16}))
    out = tmp_path / "o"
    rc = run_cli(["--problem", cfgfile, "--p", "2", "--n", "2", "--out", out])
    assert rc == 0
    resolved = json.loads((out / "resolved-config.json").read_text())
    assert resolved["p"] == [2] and resolved["n"] == [2]


def test_penalty_flag(tmp_path):
    rc = run_cli(["--case", "scordelis_lo", "--p", "2", "--n", "2",
                  "--constraint", "penalty:1e8", "--out", tmp_path / "pen"])
    assert rc == 0


def test_vtk_and_dump_outputs(tmp_path):
    out = tmp_path / "art"
    rc = run_cli(["--case", "scordelis_lo", "--p", "2", "--n", "2", "--out", out,
                  "--vtk", "--dump-system"])
    assert rc == 0
    assert (out / "scordelis_lo_p2_n2.vtk").exists()
    assert (out / "system_p2_n2.mtx").exists()
    assert (out / "rhs_p2_n2.mtx").exists()


def test_bad_config_exits_2(tmp_path, capsys):
    assert run_cli(["--out", tmp_path / "x"]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "bad-config"

    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    assert run_cli(["--problem", bad, "--out", tmp_path / "y"]) == 2

    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"case": "scordelis_lo", "n": 0}))
    assert run_cli(["--problem", cfg, "--out", tmp_path / "z"]) == 2


def test_bad_constraint_spec(tmp_path):
    assert run_cli(["--case", "scordelis_lo", "--p", "2", "--n", "2",
                    "--constraint", "frob", "--out", tmp_path / "c"]) == 2


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "tdcshell.cli", "--case",
                           "scordelis_lo", "--p", "2", "--n", "2",
                           "--out", str(tmp_path / "sp")],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "u_z_max" in proc.stdout
