import json
import math
import warnings

import pytest

from talbot.cli import EXIT_ACCEPTANCE, EXIT_OK, EXIT_SCHEMA, main
from talbot.fourier import RationalTime
from talbot.harness import (
    ScenarioError,
    bundled_scenario_path,
    bundled_scenarios,
    parse_time,
    run_scenario,
    sweep,
    time_label,
    validate_scenario,
)

LINEAR_SCENARIO = {
    "kind": "linear_riemann",
    "dispersion": {
        "phi1": [0, 0, 0, -1],
        "phi2": [0, 0, 0, 1],
        "phi3": [0, 0, 0, 2],
        "phi4": [0],
    },
    "times": [{"p": 1, "q": 3}],
    "truncation": 256,
    "grid_size": 1024,
    "analysis": {"quantization": {"observable": "re_u", "q_hypothesis": 3,
                                  "gibbs_window": 8}},
}

WEYL_SCENARIO = {
    "kind": "weyl_study",
    "weyl": {"polynomial": [0, 0, 1], "t": 1.0,
             "n_list": [64, 128, 256, 512, 1024]},
}

MANAKOV_SCENARIO = {
    "kind": "manakov",
    "initial_data": {"f": "sigma1", "g": "linear_ramp"},
    "times": [{"p": 1, "q": 10}],
    "solver": {"M": 256, "dt": 4e-5},
    "analysis": {"quantization": {"observable": "re_v", "gibbs_window": 4}},
}


def test_time_parsing_and_labels():
    t = parse_time({"p": 1, "q": 10})
    assert isinstance(t, RationalTime)
    assert float(t) == pytest.approx(math.pi / 10)
    assert time_label(t) == "t_1pi_10"
    assert time_label(0.3) == "t_0.3"
    assert parse_time(0.25) == 0.25


def test_validate_rejects_bad_documents():
    with pytest.raises(ScenarioError):
        validate_scenario({"kind": "nonsense"})
    with pytest.raises(ScenarioError):
        validate_scenario({"kind": "linear_riemann"})  # missing dispersion
    with pytest.raises(ScenarioError):
        validate_scenario({"kind": "weyl_study"})  # missing weyl block
    with pytest.raises(ScenarioError):
        validate_scenario({"kind": "manakov", "times": ["0.3"]})


def test_bundled_scenarios_validate():
    names = bundled_scenarios()
    assert len(names) >= 5
    for name in names:
        doc = json.loads(bundled_scenario_path(name).read_text())
        validate_scenario(doc)


def test_linear_scenario_outputs(tmp_path):
    manifest = run_scenario(LINEAR_SCENARIO, tmp_path / "out")
    files = {p for p, _ in manifest.outputs}
    assert "t_1pi_3.csv" in files
    assert "summary.json" in files
    header = (tmp_path / "out" / "t_1pi_3.csv").read_text().splitlines()[0]
    assert header == "x,re_u,im_u,abs_u,re_v,im_v,abs_v"
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["results"][0]["quantization"]["jumps_aligned"] is True


def test_determinism_identical_checksums(tmp_path):
    m1 = run_scenario(LINEAR_SCENARIO, tmp_path / "a")
    m2 = run_scenario(LINEAR_SCENARIO, tmp_path / "b")
    assert m1.scenario_hash == m2.scenario_hash
    assert m1.outputs == m2.outputs


def test_empty_times_is_vacuous_success(tmp_path):
    doc = dict(LINEAR_SCENARIO, times=[])
    manifest = run_scenario(doc, tmp_path / "out")
    files = {p for p, _ in manifest.outputs}
    assert files == {"summary.json"}


def test_override_dot_paths(tmp_path):
    manifest = run_scenario(
        LINEAR_SCENARIO, tmp_path / "out", overrides={"truncation": 64}
    )
    assert manifest.scenario_hash != run_scenario(
        LINEAR_SCENARIO, tmp_path / "out2"
    ).scenario_hash


def test_weyl_scenario(tmp_path):
    run_scenario(WEYL_SCENARIO, tmp_path / "out")
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert "gamma" in summary["results"][0]
    weyl_lines = (tmp_path / "out" / "weyl.csv").read_text().splitlines()
    assert weyl_lines[0] == "N,sup"
    assert len(weyl_lines) == 6


def test_manakov_mixed_data_quantizes_v(tmp_path):
    # f is the step, g the smooth ramp; at t = pi/10 the jump structure
    # appears in the second component.
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        run_scenario(MANAKOV_SCENARIO, tmp_path / "out")
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    quant = summary["results"][0]["quantization"]
    assert quant["observable"] == "re_v"
    assert quant["n_jumps"] >= 2


def test_sweep_isolation(tmp_path):
    # the middle value violates the stability envelope; its row must carry
    # the error while the neighbours stay intact
    doc = dict(MANAKOV_SCENARIO, times=[0.001])
    path = sweep(doc, "dt", [4e-5, 9e-4, 5e-5], tmp_path / "sweep")
    lines = path.read_text().splitlines()
    assert lines[0].startswith("value,")
    assert len(lines) == 4
    assert '"ok"' in lines[1] and '"ok"' in lines[3]
    assert "error" in lines[2] and "ValueError" in lines[2]


def test_sweep_time_axis(tmp_path):
    path = sweep(LINEAR_SCENARIO, "time",
                 [{"p": 1, "q": 3}, {"p": 1, "q": 6}], tmp_path / "sweep")
    lines = path.read_text().splitlines()
    assert lines[1].startswith("t_1pi_3,")
    assert lines[2].startswith("t_1pi_6,")


def test_cli_run_and_exit_codes(tmp_path):
    scen = tmp_path / "scen.json"
    scen.write_text(json.dumps(LINEAR_SCENARIO))
    assert main(["run", "--scenario", str(scen), "--out", str(tmp_path / "o")]) == EXIT_OK

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"kind": "nonsense"}))
    assert main(["run", "--scenario", str(bad), "--out", str(tmp_path / "o2")]) == EXIT_SCHEMA

    assert main(["run", "--scenario", "no_such_scenario",
                 "--out", str(tmp_path / "o3")]) == EXIT_SCHEMA


def test_cli_override_round_trip(tmp_path):
    scen = tmp_path / "scen.json"
    scen.write_text(json.dumps(LINEAR_SCENARIO))
    code = main(["run", "--scenario", str(scen), "--out", str(tmp_path / "o"),
                 "--override", "truncation=64"])
    assert code == EXIT_OK


def test_cli_list_scenarios(capsys):
    assert main(["list-scenarios"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "fig1_manakov_sigma1.json" in out


def test_cli_check_single_criterion(tmp_path, capsys):
    report = tmp_path / "report.json"
    code = main(["check", "--only", "11", "--out", str(report)])
    out = capsys.readouterr().out
    assert "criterion 11" in out
    assert code == EXIT_OK
    payload = json.loads(report.read_text())
    assert payload[0]["criterion"] == 11 and payload[0]["passed"]
