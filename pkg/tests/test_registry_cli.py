import json

import numpy as np
import pytest

from spraylab.cli import main
from spraylab.config import load_config, parse_vector
from spraylab.library import ConfigError, build_set, build_space, build_spray, default_space_config
from spraylab.model_space import Sequences
from spraylab.registry import (EXIT_CONFIG, EXIT_MISMATCH, EXIT_OK, REGISTRY, run_all,
                               run_example)

EXPECTED_IDS = {"adjacent-cone", "ex1-flat", "ex1-perturbed", "ex2-parabola", "crit-constants",
                "ex9-translation", "nonneg-fourier", "hi-sphere-loops", "stra-strata"}


# --- library ---------------------------------------------------------------------

def test_library_ids_resolve():
    for set_id in ("half-support", "orthant", "constants", "parabola", "fourier:3", "strata",
                   "strata:2", "circle-loops", "translate:half-support:0.5"):
        space = build_space(default_space_config(set_id))
        assert build_set(set_id, space) is not None
    grid = build_space(default_space_config("half-support"))
    for spray_id in ("flat", "bump", "bump:0.3", "bump-translated:0.2:0.5"):
        assert build_spray(spray_id, grid).space is grid
    assert build_spray("sphere", build_space(default_space_config("circle-loops")))


@pytest.mark.parametrize("bad", ["nope", "fourier:x", "translate:half-support"])
def test_library_bad_set(bad):
    with pytest.raises(ConfigError):
        build_set(bad, build_space(default_space_config("half-support")))


def test_library_bad_space_and_spray():
    with pytest.raises(ConfigError):
        build_space({"kind": "torus"})
    with pytest.raises(ConfigError):
        build_space({"kind": "grid", "h": -1})
    with pytest.raises(ConfigError):
        build_spray("warp", Sequences(3))


# --- config and vectors -------------------------------------------------------------

def test_parse_vector_forms(tmp_path, grid, bundle):
    sp = Sequences(3)
    assert parse_vector("zero", sp).tolist() == [0, 0, 0]
    assert parse_vector("1,2,3", sp).tolist() == [1, 2, 3]
    assert parse_vector("2", sp).tolist() == [2, 2, 2]
    assert parse_vector("random", sp, 0).shape == (3,)
    np.save(tmp_path / "v.npy", np.arange(3.0))
    assert parse_vector(str(tmp_path / "v.npy"), sp).tolist() == [0, 1, 2]
    f = parse_vector("expr:bump(x, 0.5, 1.0)", grid)
    assert f.max() == pytest.approx(1.0, abs=1e-3) and np.all(f[grid.x < 0] == 0)
    pair = parse_vector("expr:x|zero", bundle)
    assert pair.size == bundle.dim
    with pytest.raises(ConfigError):
        parse_vector("1,2", sp)
    with pytest.raises(ConfigError):
        parse_vector("expr:__import__('os')", grid)
    with pytest.raises(ConfigError):
        parse_vector("expr:x", sp)


def test_load_config(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("seed: 4\nschedule: [0.1, 0.5, 10]\n")
    assert load_config(p) == {"seed": 4, "schedule": [0.1, 0.5, 10]}
    (tmp_path / "e.yaml").write_text("")
    assert load_config(tmp_path / "e.yaml") == {}
    (tmp_path / "l.yaml").write_text("- 1\n")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "l.yaml")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")


# --- registry ------------------------------------------------------------------------

def test_registry_contents():
    assert set(REGISTRY) == EXPECTED_IDS
    for spec in REGISTRY.values():
        assert spec.checks and all(c.expect for c in spec.checks)
        build_set(spec.set_id, build_space(spec.space_config()))


def test_run_example_writes_report(tmp_path):
    rep = run_example("ex1-perturbed", seed=0, out_dir=tmp_path)
    assert rep.passed
    assert [c["verdict"] for c in rep.checks] == ["Violated", "Agree", "PASS"]
    data = json.loads((tmp_path / "ex1-perturbed" / "report.json").read_text())
    assert data["status"] == "PASS" and data["seed"] == 0
    assert data["discrepancies"] == []
    assert "wall_time" not in data
    for rel in data["artifacts"]:
        head = (tmp_path / rel).read_text().splitlines()[0]
        assert head.startswith("t,x_0,")


def test_run_example_ex1_flat():
    rep = run_example("ex1-flat", seed=0)
    assert rep.checks[0]["verdict"] == "Invariant" and rep.passed


def test_unknown_example():
    with pytest.raises(ConfigError):
        run_example("unknown")
    assert main(["reproduce", "unknown"]) == EXIT_CONFIG


def test_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run_example("ex1-perturbed", seed=7, out_dir=a)
    run_example("ex1-perturbed", seed=7, out_dir=b)
    assert (a / "ex1-perturbed" / "report.json").read_bytes() == \
        (b / "ex1-perturbed" / "report.json").read_bytes()
    run_example("ex1-perturbed", seed=8, out_dir=b)
    assert (a / "ex1-perturbed" / "report.json").read_bytes() != \
        (b / "ex1-perturbed" / "report.json").read_bytes()


def test_wrong_threshold_fails():
    sub = {k: REGISTRY[k] for k in ("ex1-perturbed", "adjacent-cone")}
    code, rows = run_all(overrides={"violation_threshold": 1e9}, registry=sub, echo=None)
    assert code == EXIT_MISMATCH
    assert dict((r[0], r[3]) for r in rows) == {"ex1-perturbed": "FAIL", "adjacent-cone": "PASS"}


def test_empty_registry():
    lines = []
    code, rows = run_all(registry={}, echo=lines.append)
    assert code == EXIT_OK and rows == []
    assert len(lines) == 1


def test_run_all_passes(tmp_path, capsys):
    code, rows = run_all(seed=0, out_dir=tmp_path)
    assert code == EXIT_OK
    assert {r[0] for r in rows} == EXPECTED_IDS
    assert all(r[3] == "PASS" for r in rows)
    out = capsys.readouterr().out
    assert out.count("PASS") >= len(EXPECTED_IDS)


def test_reproduce_from_saved_report(tmp_path):
    run_example("adjacent-cone", seed=3, out_dir=tmp_path)
    report = tmp_path / "adjacent-cone" / "report.json"
    assert main(["--out", str(tmp_path / "again"), "--config", str(report), "reproduce"]) == EXIT_OK
    assert (tmp_path / "again" / "adjacent-cone" / "report.json").read_bytes() == report.read_bytes()


# --- CLI subcommands ------------------------------------------------------------------

def run_cli(tmp_path, *args):
    return main(["--out", str(tmp_path), *args])


def read(tmp_path, name):
    return json.loads((tmp_path / f"{name}.json").read_text())


def test_cli_check_cone(tmp_path):
    assert run_cli(tmp_path, "check-cone", "--set", "orthant", "--direction",
                   "1,-2,0,0,0,0,0,0,0,0,0,0,0,0,0,0", "--expect", "NonMember") == EXIT_OK
    data = read(tmp_path, "check-cone")
    assert data["seminorms"][1]["limit"] == pytest.approx(2.0, abs=1e-9)
    assert data["relative_to"] == "configured seminorm family"
    assert run_cli(tmp_path, "check-cone", "--set", "orthant", "--direction", "1",
                   "--expect", "NonMember") == EXIT_MISMATCH
    assert run_cli(tmp_path, "check-cone", "--set", "orthant", "--point", "-1",
                   "--direction", "1") == EXIT_CONFIG


def test_cli_second_order_and_admissible(tmp_path):
    assert run_cli(tmp_path, "check-cone", "--set", "half-support",
                   "--direction", "expr:bump(x, 0.5, 1.0)", "--accel", "zero",
                   "--expect", "Member") == EXIT_OK
    assert run_cli(tmp_path, "check-admissible", "--set", "half-support", "--velocity",
                   "expr:bump(x, 0.5, -1.0)", "--expect", "Member") == EXIT_OK
    assert run_cli(tmp_path, "check-admissible", "--set", "parabola",
                   "--point", "expr:0.5*sin(x)|expr:0.25*sin(x)**2", "--velocity", "zero",
                   "--expect", "Member") == EXIT_OK


def test_cli_integrate(tmp_path):
    assert run_cli(tmp_path, "integrate", "--spray", "bump:0.2", "--point", "zero",
                   "--velocity", "expr:bump(x, 0.1)", "--tspan", "0,0.5", "--h", "0.01") == EXIT_OK
    data = read(tmp_path, "integrate")
    assert data["samples"] == 51 and data["crossval_error"] < 1e-8
    lines = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert len(lines) == 52 and lines[0].startswith("t,x_0")


def test_cli_invariance_family(tmp_path):
    assert run_cli(tmp_path, "verify-invariance", "--set", "half-support", "--trials", "3",
                   "--expect", "Invariant") == EXIT_OK
    assert run_cli(tmp_path, "verify-invariance", "--set", "half-support", "--spray", "bump:0.2",
                   "--trials", "1", "--expect", "Violated") == EXIT_OK
    assert (tmp_path / "verify-invariance_counterexample.csv").exists()
    assert run_cli(tmp_path, "check-totally-geodesic", "--set", "constants", "--count", "3",
                   "--expect", "TotallyGeodesic") == EXIT_OK
    assert run_cli(tmp_path, "check-convexity", "--set", "constants", "--count", "3",
                   "--expect", "PASS") == EXIT_OK
    assert run_cli(tmp_path, "check-convexity", "--set", "constants", "--spray", "bump") \
        == EXIT_CONFIG
    assert run_cli(tmp_path, "check-tangency", "--set", "half-support", "--trials", "2",
                   "--expect", "Agree") == EXIT_OK
    assert run_cli(tmp_path, "check-flow", "--set", "circle-loops", "--spray", "sphere",
                   "--times", "3.141592653589793", "--omega", "1", "--count", "2",
                   "--expect", "PASS") == EXIT_OK
    assert run_cli(tmp_path, "check-orbit", "--set", "half-support", "--trials", "3",
                   "--expect", "PASS") == EXIT_OK
    assert run_cli(tmp_path, "check-strata", "--N", "6", "--trials", "2",
                   "--expect", "PASS") == EXIT_OK


def test_cli_spray_commands(tmp_path):
    assert run_cli(tmp_path, "check-spray", "--spray", "sphere", "--count", "20",
                   "--expect", "PASS") == EXIT_OK
    assert run_cli(tmp_path, "pushforward", "--spray", "flat", "--count", "5",
                   "--expect", "Automorphism") == EXIT_OK
    assert read(tmp_path, "pushforward")["max_discrepancy"] == 0
    assert run_cli(tmp_path, "pushforward", "--spray", "bump:0.2", "--count", "5",
                   "--expect", "NotAutomorphism") == EXIT_OK
    assert run_cli(tmp_path, "check-spray", "--spray", "nope") == EXIT_CONFIG


def test_cli_out_env_and_config(tmp_path, monkeypatch):
    monkeypatch.setenv("SPRAYLAB_OUT", str(tmp_path / "env"))
    assert main(["check-spray", "--count", "2"]) == EXIT_OK
    assert (tmp_path / "env" / "check-spray.json").exists()
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("seed: 5\nschedule: '0.1,0.5,8'\nspace: {kind: sequences, N: 2}\n")
    assert main(["--config", str(cfg), "check-cone", "--set", "orthant",
                 "--direction", "1,1", "--expect", "Member"]) == EXIT_OK
    data = json.loads((tmp_path / "env" / "check-cone.json").read_text())
    assert len(data["seminorms"]) == 2 and len(data["seminorms"][0]["trace"]) == 9


def test_cli_flags_after_subcommand(tmp_path):
    assert main(["check-spray", "--count", "2", "--out", str(tmp_path), "--seed", "3"]) == EXIT_OK
    assert (tmp_path / "check-spray.json").exists()


def test_cli_bad_schedule(tmp_path):
    assert run_cli(tmp_path, "--schedule", "0.1,2,10", "check-cone", "--set", "orthant",
                   "--direction", "1") == EXIT_CONFIG
