import json
from fractions import Fraction

import numpy as np
import pytest

from sdattack import artifacts
from sdattack.cli import main
from sdattack.errors import ScenarioError
from sdattack.scenarios import (
    DEMOS,
    builtin,
    check_realization,
    load_scenario,
    scenario_from_dict,
    multirate_system,
    multirate_transfer,
)


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def multirate_file(tmp_path):
    path = tmp_path / "multirate.json"
    builtin("sec4c").dump(path)
    return path


def test_multirate_realization_matches_transfer():
    rng = np.random.default_rng(5)
    freqs = rng.uniform(-3, 3, 5) + 1j * rng.uniform(0.1, 8, 5)
    assert check_realization(multirate_system(), multirate_transfer, freqs) <= 1e-10
    sys = multirate_system()
    assert (sys.n, sys.p, sys.q) == (5, 3, 1)


def test_demo_catalog():
    for name in DEMOS:
        sc = builtin(name)
        assert sc.name == name
    x38 = builtin("x38-placeholder")
    assert not x38.reference_data and "placeholder" in x38.description.lower()
    assert (x38.system.n, x38.system.p, x38.system.q) == (11, 3, 9)
    g = x38.design_grid()
    assert (g.alpha, g.beta) == (1, 4)
    assert builtin("sec4c-mismatch").true_grid().T_s == 0.4004
    with pytest.raises(KeyError):
        builtin("nope")


@pytest.mark.parametrize("name", DEMOS)
def test_scenario_round_trip(tmp_path, name):
    sc = builtin(name).with_overrides(t_star=[Fraction(1, 2), Fraction(1)]) if name == "sec4c" else builtin(name)
    path = tmp_path / "s.json"
    sc.dump(path)
    back = load_scenario(path)
    assert back.system == sc.system and back.timing == sc.timing and back.mismatch == sc.mismatch
    assert back.thresholds == sc.thresholds and back.t_star == sc.t_star
    assert back.tolerances == sc.tolerances and back.clusters == sc.clusters
    assert back.to_dict() == sc.to_dict()


@pytest.mark.parametrize(
    "mutate, field",
    [
        (lambda d: d.pop("system"), "system"),
        (lambda d: d["system"].pop("A"), "system.A"),
        (lambda d: d["system"].update(B=[[1.0, 0.0]]), "system.B"),
        (lambda d: d["system"].update(C=[[1.0, 0.0]]), "system.C"),
        (lambda d: d["system"].update(A=[[1, 2, 3]]), "system.A"),
        (lambda d: d["timing"].update(T_a=-1), "timing.T_a"),
        (lambda d: d["timing"].update(offset=5.0), "timing.offset"),
        (lambda d: d.update(t_star="abc"), "t_star"),
        (lambda d: d.update(t_star="3/2"), "t_star"),
        (lambda d: d.update(clusters=-1), "clusters"),
        (lambda d: d.update(thresholds={"kind": "linear", "value": -1}), "thresholds"),
        (lambda d: d["system"].update(n=7), "system.n"),
    ],
)
def test_scenario_validation_names_field(mutate, field):
    d = builtin("sec4a").to_dict()
    mutate(d)
    with pytest.raises(ScenarioError) as exc:
        scenario_from_dict(d)
    assert exc.value.field == field


def test_plan_and_trace_round_trip(tmp_path):
    from sdattack.cli import plan_for
    from sdattack.sim import simulate_error

    sc = builtin("sec4c")
    plan = plan_for(sc)
    artifacts.write_plan(plan, tmp_path / "p.json", tmp_path / "p.csv")
    back = artifacts.load_plan(tmp_path / "p.json")
    for key in ("eta", "zeta", "kappa", "H", "x_c", "x_a", "a_bar", "disruption_times"):
        assert np.array_equal(getattr(back, key), getattr(plan, key)), key
    assert back.t_star == plan.t_star and back.disruption_units == plan.disruption_units
    tr = simulate_error(sc.system, sc.true_grid(), plan, 3)
    artifacts.write_trace(tr, tmp_path / "t.csv")
    tb = artifacts.load_trace(tmp_path / "t.csv")
    assert np.array_equal(tb.times, tr.times) and np.array_equal(tb.x, tr.x) and np.array_equal(tb.y, tr.y)
    assert np.array_equal(tb.is_sensing, tr.is_sensing)
    csv_rows = (tmp_path / "p.csv").read_text().splitlines()
    assert csv_rows[0] == "i,t,a_1,a_2,a_3" and len(csv_rows) == 41


def test_analyze_exit_codes(capsys, multirate_file, tmp_path):
    code, out, _ = run_cli(capsys, "analyze", "--scenario", multirate_file)
    report = json.loads(out)
    assert code == 0 and report["t_star"] == "1/2" and report["rank_CPi"] == 5
    d = builtin("sec4a").to_dict()
    d["system"] = {"A": (-np.eye(3)).tolist(), "B": np.eye(3).tolist(), "C": np.eye(3).tolist()}
    bad = tmp_path / "square.json"
    bad.write_text(json.dumps(d))
    code, out, _ = run_cli(capsys, "analyze", "--scenario", bad)
    assert code == 2 and json.loads(out)["failing_items"] == ["a", "b"]
    code, _, err = run_cli(capsys, "synthesize", "--scenario", bad, "--out", tmp_path / "o")
    assert code == 2 and "(a)" in err
    code, _, err = run_cli(capsys, "analyze", "--scenario", tmp_path / "missing.json")
    assert code == 1 and "--scenario" in err
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps({"system": {"A": [[1]]}, "timing": {"T_a": 1, "T_s": 1}}))
    code, _, err = run_cli(capsys, "analyze", "--scenario", broken)
    assert code == 1 and "system.B" in err


def test_step_commands_and_bit_stability(capsys, multirate_file, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        assert run_cli(capsys, "synthesize", "--scenario", multirate_file, "--out", out)[0] == 0
        assert run_cli(capsys, "simulate", "--scenario", multirate_file, "--out", out, "--no-figures")[0] == 0
    for name in ("plan.json", "plan.csv", "trace.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name
    code, out, _ = run_cli(capsys, "verify", "--scenario", multirate_file, "--out", out1)
    assert code == 0 and json.loads(out)["passed"] is True
    code, _, err = run_cli(capsys, "verify", "--scenario", multirate_file, "--plan", out1 / "plan.json",
                           "--trace", tmp_path / "none.csv")
    assert code == 1 and "--trace" in err


def test_zero_clusters_writes_header_only(capsys, multirate_file, tmp_path):
    code, _, _ = run_cli(capsys, "synthesize", "--scenario", multirate_file, "--out", tmp_path, "--clusters", 0)
    assert code == 0
    assert (tmp_path / "plan.csv").read_text() == "i,t,a_1,a_2,a_3\n"


def test_zero_attack_plan_fails_verify(capsys, multirate_file, tmp_path):
    run_cli(capsys, "synthesize", "--scenario", multirate_file, "--out", tmp_path)
    d = json.loads((tmp_path / "plan.json").read_text())
    d["a_bar"] = np.zeros_like(np.array(d["a_bar"])).tolist()
    (tmp_path / "plan.json").write_text(json.dumps(d))
    run_cli(capsys, "simulate", "--scenario", multirate_file, "--out", tmp_path, "--no-figures")
    code, out, _ = run_cli(capsys, "verify", "--scenario", multirate_file, "--out", tmp_path)
    rep = json.loads(out)
    assert code == 2 and rep["stealthy"] and not rep["disruptive"]


@pytest.mark.parametrize("name, expected", [("sec4a", 0), ("sec4c-mismatch", 2)])
def test_demo_writes_artifacts(capsys, tmp_path, name, expected):
    code, out, _ = run_cli(capsys, "demo", name, "--out", tmp_path)
    assert code == expected
    for f in ("scenario.json", "analysis.json", "plan.json", "plan.csv", "trace.csv", "verification.json",
              "state_norm.png", "output.png", "attack.png"):
        assert (tmp_path / f).stat().st_size > 0, f
    summary = json.loads(out)
    if name == "sec4a":
        assert (tmp_path / "state_3d.png").exists()
        assert summary["kappa_1"] == pytest.approx(3.15, abs=0.01)
    else:
        assert summary["stealthy"] is False


def test_demo_unknown_and_list(capsys):
    assert run_cli(capsys, "demo", "bogus")[0] == 1
    code, out, _ = run_cli(capsys, "demo", "--list")
    assert code == 0 and all(n in out for n in DEMOS)


def test_flags_and_env_overrides(capsys, multirate_file, tmp_path, monkeypatch):
    code, out, _ = run_cli(capsys, "analyze", "--scenario", multirate_file, "--t-star", "1")
    assert code == 0 and json.loads(out)["t_star"] == "1"
    assert run_cli(capsys, "analyze", "--scenario", multirate_file, "--t-star", "2")[0] == 1
    monkeypatch.setenv("SDATTACK_T_STAR", "1/2")
    monkeypatch.setenv("SDATTACK_CLUSTERS", "3")
    code, out, _ = run_cli(capsys, "synthesize", "--scenario", multirate_file, "--out", tmp_path)
    assert code == 0 and json.loads(out)["clusters"] == 3
    # explicit flag beats the environment
    code, out, _ = run_cli(capsys, "synthesize", "--scenario", multirate_file, "--out", tmp_path, "--clusters", 2)
    assert json.loads(out)["clusters"] == 2


def test_batch(capsys, tmp_path):
    files = []
    for name in ("sec4a", "sec4c-mismatch"):
        builtin(name).dump(tmp_path / f"{name}.json")
        files.append(tmp_path / f"{name}.json")
    code, out, _ = run_cli(capsys, "batch", *files, "--out", tmp_path / "out", "--no-figures", "--jobs", 2)
    results = json.loads(out)
    assert code == 2 and [r["stealthy"] for r in results] == [True, False]
    assert (tmp_path / "out" / "sec4a" / "verification.json").exists()


def test_check_command_is_seeded(capsys):
    code, out1, _ = run_cli(capsys, "check", "--count", 8, "--seed", 3)
    _, out2, _ = run_cli(capsys, "check", "--count", 8, "--seed", 3)
    assert code == 0 and out1 == out2 and out1.count("PASS") == 3
