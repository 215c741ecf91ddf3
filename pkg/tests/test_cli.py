"""The chernlab command line surface and its exit codes."""

import json
import subprocess
import sys

from chernlab.cli import main


def run_cli(args):
    return main(args)


def test_fixture_and_validate(tmp_path):
    fx = tmp_path / "module.json"
    assert run_cli(["fixture", "discrete_circle", "--seed", "0",
                    "--params", '{"n": 3}', "-o", str(fx)]) == 0
    assert run_cli(["validate", str(fx)]) == 0


def test_validate_catches_broken_instance(tmp_path):
    fx = tmp_path / "module.json"
    run_cli(["fixture", "discrete_circle", "--seed", "0", "--params", '{"n": 3}', "-o", str(fx)])
    data = json.loads(fx.read_text())
    data["Q"]["data"][1] = [999.0, 0.0]  # breaks hermiticity and the commutator rule
    fx.write_text(json.dumps(data))
    assert run_cli(["validate", str(fx)]) == 1


def test_validate_algebra_instance(tmp_path):
    from chernlab.fixtures import discrete_circle_algebra
    from chernlab.serialize import dump_json

    path = tmp_path / "alg.json"
    dump_json(discrete_circle_algebra(3).to_json_dict(), path)
    assert run_cli(["validate", str(path)]) == 0


def test_unknown_fixture_exit_code(tmp_path):
    assert run_cli(["fixture", "bogus"]) == 2


def test_suite_subset_and_explain(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = run_cli(["suite", "--group", "brackets", "--seed", "1", "--fast", "-o", str(out)])
    assert code == 0
    report = json.loads(out.read_text())
    assert report["passed"] is True
    assert list(report["results"]) == ["brackets"]
    capsys.readouterr()
    assert run_cli(["explain", str(out), "block-exponential-vs-oracle"]) == 0
    shown = capsys.readouterr().out
    assert "residual" in shown and "formula" in shown
    assert run_cli(["explain", str(out), "no-such-check"]) == 2


def test_suite_reports_reproducible(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    for path in (a, b):
        assert run_cli(["suite", "--group", "brackets", "--seed", "3",
                        "--fast", "--stable", "-o", str(path)]) == 0
    assert a.read_text() == b.read_text()


def test_bad_config_exit_code(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"groups": ["nonsense"]}))
    assert run_cli(["suite", "-c", str(cfg)]) == 2


def test_pair_command(tmp_path):
    from chernlab.fixtures import discrete_circle, circle_loop_element
    from chernlab.serialize import complex_pair, dump_json, module_to_json

    M = discrete_circle(6, seed=0)
    mod_path = tmp_path / "module.json"
    dump_json(module_to_json(M), mod_path)
    g = circle_loop_element(M.alg, eps=0.10, seed=7)
    g_path = tmp_path / "g.json"
    entries = [[[complex_pair(z) for z in g.entries[p, q]] for q in range(1)] for p in range(1)]
    g_path.write_text(json.dumps({"m": 1, "entries": entries}))
    out = tmp_path / "pairing.json"
    assert run_cli(["pair", "-m", str(mod_path), "-g", str(g_path),
                    "--nmax", "8", "-o", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["verdict"] is True
    assert len(report["terms"]) == 8


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "chernlab.cli", "validate", "/nonexistent.json"],
                          capture_output=True, text=True)
    assert proc.returncode == 2


def test_threads_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("CHERNLAB_THREADS", "2")
    out = tmp_path / "r.json"
    assert run_cli(["suite", "--group", "brackets", "--group", "algebra",
                    "--seed", "0", "--fast", "-o", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["config"]["jobs"] == 2


def test_tolerance_zero_forces_failures(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"groups": ["brackets"], "seed": 2, "fast": True, "tol_scale": 0.0}))
    out = tmp_path / "r.json"
    code = run_cli(["suite", "-c", str(cfg), "-o", str(out)])
    assert code == 1
    report = json.loads(out.read_text())
    assert report["passed"] is False
    # residuals are still reported with the scaled tolerances
    checks = [c for item in report["results"]["brackets"] for c in item["checks"]]
    assert checks and all(c["tol"] == 0.0 for c in checks)
    assert any(c["residual"] > 0 for c in checks)
