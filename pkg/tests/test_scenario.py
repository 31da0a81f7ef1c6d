"""Scenario validation, deterministic outputs, and the command line."""

import json

import pytest
import yaml

from jamftl import ScenarioError, load_scenario, run_scenario, scenario_from_dict
from jamftl.cli import main as cli_main

# Small, fast configuration reused across the file: short robot, coarse grid.
FAST = {
    "robot": {"n_segments": 6},
    "trajectory": {"kind": "C", "bend_class": "gentle",
                   "bent_per_section": 2, "lead": 1},
    "controller": "ftl",
    "strategy": 1,
    "runs": 1,
    "grid_resolution": 0.5,
}

PAYLOADS = ("effective_config.yaml", "events.csv", "forces.csv", "lambda.csv",
            "summary.csv")


def test_defaults_applied():
    sc = scenario_from_dict({})
    assert sc.name == "scenario"
    assert sc.controller == "ftl"
    assert sc.strategies == (1, 2, 3, 4)
    assert sc.runs == 3
    assert sc.robot.n_segments == 12
    assert sc.stiffness.jam_ratio == 34.0
    assert sc.checkpoint_fractions == (0.1, 0.5, 0.9)


def test_validation_messages_name_the_field():
    cases = [
        ({"controler": "ftl"}, "unknown field"),
        ({"controller": "magic"}, "controller"),
        ({"strategy": 9}, "strategy"),
        ({"runs": 0}, "runs"),
        ({"checkpoint_fractions": [0.9, 0.5, 0.1]}, "checkpoint_fractions"),
        ({"checkpoint_inner_diameter": 10.0}, "checkpoint_inner_diameter"),
        ({"grid_resolution": -1.0}, "grid_resolution"),
        ({"perturbation_deg": -2.0}, "perturbation_deg"),
        ({"outputs": ["events", "movie"]}, "outputs"),
        ({"trajectory": {"kind": "helix"}}, "trajectory.kind"),
        ({"robot": {"n_segments": 0}}, "robot"),
        ({"stiffness": {"k_soft": -1.0}}, "stiffness"),
    ]
    for raw, needle in cases:
        with pytest.raises(ScenarioError, match=needle):
            scenario_from_dict(raw)


def test_effective_config_round_trips():
    sc = scenario_from_dict(dict(FAST))
    echo = sc.effective_config()
    again = scenario_from_dict({
        "name": echo["name"], "robot": echo["robot"],
        "trajectory": echo["trajectory"], "controller": echo["controller"],
        "strategy": echo["strategy"], "stiffness": echo["stiffness"],
        "runs": echo["runs"], "seed": echo["seed"],
        "perturbation_deg": echo["perturbation_deg"],
        "checkpoint_fractions": echo["checkpoint_fractions"],
        "checkpoint_inner_diameter": echo["checkpoint_inner_diameter"],
        "grid_resolution": echo["grid_resolution"],
        "sweep_interpolation": echo["sweep_interpolation"],
        "outputs": echo["outputs"]})
    assert again.effective_config() == echo


def test_load_scenario_names_after_the_file(tmp_path):
    p = tmp_path / "bench_c.yaml"
    p.write_text(yaml.safe_dump(FAST), encoding="utf-8")
    assert load_scenario(p).name == "bench_c"
    with pytest.raises(ScenarioError, match="not found"):
        load_scenario(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("controller: [unclosed", encoding="utf-8")
    with pytest.raises(ScenarioError, match="cannot parse"):
        load_scenario(bad)


def test_outputs_are_byte_deterministic(tmp_path):
    sc = scenario_from_dict(dict(FAST, name="det"))
    run_scenario(sc, out_dir=tmp_path / "a")
    run_scenario(sc, out_dir=tmp_path / "b")
    names = PAYLOADS + ("sweep_det.svg",)
    for name in names:
        a = (tmp_path / "a" / name).read_bytes()
        b = (tmp_path / "b" / name).read_bytes()
        assert a == b, f"{name} differs between identical runs"
    # No staging leftovers; the wall-clock metadata lives in its own file.
    leftovers = [p for p in (tmp_path / "a").iterdir()
                 if p.name.startswith(".stage")]
    assert not leftovers
    assert (tmp_path / "a" / "run_meta.yaml").exists()


def test_perturbation_is_seeded_per_run(tmp_path):
    sc = scenario_from_dict(dict(FAST, name="pert", perturbation_deg=1.0,
                                 runs=2, outputs=["forces"]))
    records = run_scenario(sc)
    lams = [r.lam for r in records]
    assert lams[0] != lams[1]          # different run indices, different noise
    again = run_scenario(sc)
    assert [r.lam for r in again] == lams   # but fully reproducible


def test_csv_precision_env_override(monkeypatch):
    from jamftl.report import fmt
    monkeypatch.setenv("JAMFTL_CSV_PRECISION", "3")
    assert fmt(1.234567) == "1.23"
    monkeypatch.setenv("JAMFTL_CSV_PRECISION", "8")
    assert fmt(1.234567) == "1.234567"
    monkeypatch.delenv("JAMFTL_CSV_PRECISION")
    assert fmt(0.125) == "0.125"


def test_cli_run_compare_schema(tmp_path, capsys):
    scen = tmp_path / "fast.yaml"
    scen.write_text(yaml.safe_dump(FAST), encoding="utf-8")
    out_a = tmp_path / "out_a"
    out_b = tmp_path / "out_b"
    assert cli_main(["run", "--scenario", str(scen), "--out", str(out_a)]) == 0
    assert cli_main(["run", "--scenario", str(scen), "--out", str(out_b)]) == 0
    for name in PAYLOADS:
        assert (out_a / name).exists()
    assert (out_a / "sweep_fast.svg").exists()

    cmp_dir = tmp_path / "cmp"
    assert cli_main(["compare", "--out", str(cmp_dir), str(out_a),
                     str(out_b)]) == 0
    assert (cmp_dir / "comparison.csv").exists()

    capsys.readouterr()
    assert cli_main(["schema"]) == 0
    schema = json.loads(capsys.readouterr().out)
    assert schema["type"] == "object"
    assert "controller" in schema["properties"]


def test_cli_reports_validation_errors(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("controller: magic\n", encoding="utf-8")
    assert cli_main(["run", "--scenario", str(bad),
                     "--out", str(tmp_path / "o")]) == 1
    assert cli_main(["verify", "--suite", "unknown"]) == 1
