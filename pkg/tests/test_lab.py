"""Configuration, experiment runners, the statement suite and the CLI."""
import csv
import json

import numpy as np
import pytest

from nodalab.caloric import SpaceTimePolynomial, caloric_extension
from nodalab.errors import DomainError
from nodalab.lab import (
    ExperimentConfig,
    default_config,
    load_config,
    run_experiment,
)
from nodalab.lab.cli import main
from nodalab.lab.experiments import (
    initial_data,
    run_custom,
    run_jobs,
    sampled_time_grid,
    write_rows_csv,
)
from nodalab.lab.lemmas import STATEMENTS, run_lemma_suite
from nodalab.solver import load_snapshot


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def test_default_configs_validate_and_hash():
    hashes = set()
    for sc in ("example1", "example2", "angenent1d", "monotonicity_audit", "stratification", "dimension", "custom"):
        cfg = default_config(sc)
        assert len(cfg.config_hash) == 12
        hashes.add(cfg.config_hash)
    assert len(hashes) == 7


def test_hash_ignores_output_dir_but_not_seed():
    cfg = default_config("custom")
    assert cfg.with_updates(output_dir="/tmp/x").config_hash == cfg.config_hash
    assert cfg.with_updates(seed=5).config_hash != cfg.config_hash


def test_validation_errors():
    with pytest.raises(DomainError):
        default_config("nope")
    with pytest.raises(DomainError):
        ExperimentConfig(name="x", scenario="custom", coefficients="nope")
    with pytest.raises(DomainError):
        ExperimentConfig(name="x", scenario="custom", grid={"h": -1.0})
    with pytest.raises(DomainError):
        ExperimentConfig(name="x", scenario="custom", times=[0.5], horizon=0.1)
    with pytest.raises(DomainError):
        ExperimentConfig(name="x", scenario="custom", tolerances={"eps": 0})
    with pytest.raises(DomainError):
        ExperimentConfig.from_mapping({"name": "x", "scenario": "custom", "bogus": 1})


def test_load_toml_and_json(tmp_path):
    (tmp_path / "c.toml").write_text(
        'name = "t"\nscenario = "custom"\ntimes = [0.0, 0.05]\nseed = 3\n'
        '[grid]\nh = 0.1\ntau = 0.01\nbbox = [[-1, 1], [-1, 1]]\n'
        '[params.initial]\nkind = "random_caloric"\norder = 2\n')
    cfg = load_config(tmp_path / "c.toml")
    assert cfg.grid.h == 0.1 and cfg.seed == 3 and cfg.params["initial"]["order"] == 2
    (tmp_path / "c.json").write_text(json.dumps(cfg.to_dict()))
    assert load_config(tmp_path / "c.json").config_hash == cfg.config_hash
    (tmp_path / "c.yaml").write_text("")
    with pytest.raises(DomainError):
        load_config(tmp_path / "c.yaml")


# ---------------------------------------------------------------------------
# experiment helpers
# ---------------------------------------------------------------------------

def test_sampled_time_grid_hits_samples():
    times = sampled_time_grid(-0.05, [0.0, -0.02], 2e-3, fine=(0.005, 2.5e-4))
    assert times[0] == -0.05
    assert np.any(np.isclose(times, -0.02, atol=1e-15)) and times[-1] == pytest.approx(0.0, abs=1e-15)
    assert np.all(np.diff(times) > 0)


def test_write_rows_csv(tmp_path):
    p = write_rows_csv(tmp_path / "r.csv", [{"a": np.float64(1.5), "b": 2}], "abc")
    rows = list(csv.DictReader(p.open()))
    assert rows == [{"a": "1.5", "b": "2", "config_hash": "abc"}]


def test_initial_data_kinds(tmp_path):
    f, P = initial_data({"kind": "random_caloric", "order": 2}, 2, seed=1)
    assert P.is_caloric()
    Q = caloric_extension({(2, 0): 1}, n=2)
    (tmp_path / "p.json").write_text(json.dumps(Q.to_json()))
    f, obj = initial_data({"kind": "polynomial", "path": str(tmp_path / "p.json")}, 2)
    assert f(np.array([[2.0, 0.0]])) == pytest.approx([4.0])
    f, prof = initial_data("example1", 2)
    assert f(np.array([[1.0, 0.0]])) == pytest.approx([0.0])
    f, a = initial_data({"kind": "sine_modes", "modes": 3}, 1, seed=2)
    assert f(np.array([[0.0], [1.0]])) == pytest.approx([0.0, 0.0], abs=1e-12)
    with pytest.raises(DomainError):
        initial_data("nope", 2)


def test_custom_run_writes_snapshot_and_reports(tmp_path):
    cfg = default_config("custom", output_dir=str(tmp_path / "out"), seed=4)
    res = run_custom(cfg, snapshot=str(tmp_path / "snap.bin"))
    assert res.passed
    F = load_snapshot(tmp_path / "snap.bin")
    assert F.metadata["config_hash"] == cfg.config_hash
    P = res.metadata["field"]
    assert np.array_equal(F.values, P.values)
    report = json.loads((tmp_path / "out" / "custom_report.json").read_text())
    assert report["config_hash"] == cfg.config_hash and report["passed"]
    rows = list(csv.DictReader((tmp_path / "out" / "custom.csv").open()))
    assert all(r["config_hash"] == cfg.config_hash for r in rows)


def test_custom_run_reproduces_caloric_polynomial():
    # with polynomial Dirichlet data the discrete solution tracks the polynomial
    cfg = default_config("custom", params={"initial": {"kind": "random_caloric", "order": 2}})
    res = run_custom(cfg)
    F = res.metadata["field"]
    P = initial_data({"kind": "random_caloric", "order": 2}, 2, cfg.seed)[1]
    pts = F.grid_points()
    assert np.max(np.abs(F.slice_values(0.1) - P(pts, 0.1))) < 1e-9


def test_run_jobs_parallel_matches_serial():
    cfgs = [default_config("example1"), default_config("custom", seed=1)]
    serial = run_jobs(cfgs, workers=1)
    parallel = run_jobs(cfgs, workers=2)
    assert [r["config_hash"] for r in serial] == [r["config_hash"] for r in parallel]
    assert [r["passed"] for r in serial] == [r["passed"] for r in parallel] == [True, True]
    assert serial[1]["rows"] == parallel[1]["rows"]


def test_example1_runner_checks():
    res = run_experiment(default_config("example1"))
    names = {c.name for c in res.checks}
    assert {"r0_equals_one", "r_t_strictly_increasing", "slice_value_f(1,0)"} <= names
    assert res.passed


# ---------------------------------------------------------------------------
# statement suite
# ---------------------------------------------------------------------------

def test_statement_ids_are_unique_and_descriptive():
    ids = [s[0] for s in STATEMENTS]
    assert len(ids) == len(set(ids))
    assert all("." in i for i in ids)


def test_lemma_subset_passes():
    rows = run_lemma_suite(only=["caloric.", "kernel."], budget=60)
    assert rows[-1].id == "suite.runtime_budget"
    assert {r.id for r in rows[:-1]} == {s[0] for s in STATEMENTS if s[0].startswith(("caloric.", "kernel."))}
    assert all(r.passed for r in rows), [r for r in rows if not r.passed]


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------

def test_cli_reproduce_example1_json(capsys, tmp_path):
    code = main(["reproduce", "example1", "--json", "--out", str(tmp_path)])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert out["reports"][0]["passed"]
    assert (tmp_path / "example1.csv").exists()


def test_cli_solve_nodal_frequency_stratify_chain(capsys, tmp_path):
    snap = tmp_path / "s.bin"
    assert main(["solve", "--out", str(snap)]) == 0
    assert main(["nodal", str(snap), "--t", "0.1", "--out", str(tmp_path / "z.csv"),
                 "--summary", str(tmp_path / "z.json")]) == 0
    summary = json.loads((tmp_path / "z.json").read_text())
    assert set(summary) == {"t", "measure", "dimension", "count", "singular_count"}
    capsys.readouterr()
    assert main(["frequency", str(snap), "--center", "0,0", "--t0", "0.1", "--radii", "0.02:0.06:3",
                 "--json", "--out", str(tmp_path / "f.csv"), "--tag", "abc"]) == 0
    rows = json.loads(capsys.readouterr().out)["rows"]
    assert len(rows) == 3 and all(np.isfinite(r["N"]) for r in rows)
    assert main(["stratify", str(snap), "--t", "0.1", "--k", "1", "--on", "grid", "--stride", "10",
                 "--max-scale", "0.2", "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["k"] == 1 and payload["points"] > 0


def test_cli_frequency_of_polynomial_json(capsys, tmp_path):
    P = caloric_extension({(2, 0): 1}, n=2)
    path = tmp_path / "p.json"
    path.write_text(json.dumps(P.to_json()))
    assert main(["frequency", str(path), "--center", "0,0", "--radii", "0.1,0.5", "--json"]) == 0
    rows = json.loads(capsys.readouterr().out)["rows"]
    assert [r["N"] for r in rows] == pytest.approx([2.0, 2.0], abs=1e-9)


def test_cli_errors_exit_two(capsys, tmp_path):
    assert main(["nodal", str(tmp_path / "missing.bin"), "--t", "0"]) == 2
    P = SpaceTimePolynomial.coordinate(2, 0)
    path = tmp_path / "p.json"
    path.write_text(json.dumps(P.to_json()))
    assert main(["frequency", str(path), "--center", "0,0,0"]) == 2
    with pytest.raises(SystemExit):
        main(["reproduce", "nope"])


def test_cli_lemmas_subset(capsys):
    assert main(["lemmas", "--only", "caloric.frequency_of"]) == 0
    assert "caloric.frequency_of_homogeneous" in capsys.readouterr().out
