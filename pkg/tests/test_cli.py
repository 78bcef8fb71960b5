import json
import subprocess
import sys

import pytest

from ncwb import fixture_path
from ncwb.cli import main
from ncwb.demos import DEMOS, DemoOptions, UnknownDemo, run_demo


@pytest.mark.parametrize("name", list(DEMOS))
def test_every_demo_reproduces(name):
    rep = run_demo(name)
    assert rep.verdict == "reproduced", rep.summary()
    assert rep.exit_code == 0
    assert rep.wall_time < 5


def test_unknown_demo():
    with pytest.raises(UnknownDemo):
        run_demo("nope")
    assert main(["demo", "nope"]) == 2


def test_demo_cli_and_json(tmp_path, capsys):
    out = tmp_path / "trine.json"
    assert main(["demo", "trine", "--json", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["verdict"] == "reproduced" and data["name"] == "trine"
    assert "wall_time" not in data
    assert "trine" in capsys.readouterr().out


def test_json_is_byte_stable(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert main(["demo", "gleason", "--seed", "3", "--json", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_check_fair_coin_passes():
    assert main(["check", "--theory", str(fixture_path("fair-coin-theory.json")),
                 "--model", str(fixture_path("fair-coin-model.json")), "-q"]) == 0


def test_check_schema_violation_names_entry(capsys):
    code = main(["check", "--theory", str(fixture_path("fair-coin-theory.json")),
                 "--model", str(fixture_path("bad-response-sum-model.json"))])
    assert code == 2
    assert "(M, lambda)" in capsys.readouterr().err


def test_check_bit_flip_extension_lists_measurement_failure(tmp_path):
    out = tmp_path / "c.json"
    code = main(["check", "--theory", str(fixture_path("bit-flip-theory.json")),
                 "--model", str(fixture_path("bit-flip-extended-model.json")),
                 "--json", str(out)])
    assert code == 1
    data = json.loads(out.read_text())
    failed = {c["name"] for c in data["evidence"]["children"] if not c["passed"]}
    assert "measurement noncontextuality" in failed


def test_check_wigner_fixture_passes():
    assert main(["check", "--theory", str(fixture_path("wigner-theory.json")),
                 "--model", str(fixture_path("wigner-model.json")), "-q"]) == 0


@pytest.mark.parametrize("problem,mode,verdict", [
    ("cabello-nakamura.json", "d", "infeasible"),
    ("coarse-grain-paradox.json", "d", "infeasible"),
    ("coarse-grain-paradox.json", "s", "feasible"),
    ("trine.json", "s", "infeasible"),
    ("xyz.json", "d", "feasible"),
])
def test_solve_fixtures(tmp_path, problem, mode, verdict):
    out = tmp_path / "s.json"
    assert main(["solve", "--problem", str(fixture_path(problem)), "--mode", mode,
                 "--json", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["verdict"] == verdict
    if verdict == "infeasible":
        assert data["evidence"]["details"]["certificate"]["exhaustive"]


def test_solve_coarse_grain_spectral_half():
    from ncwb.demos import solve_assignment
    rep = solve_assignment(fixture_path("coarse-grain-paradox.json"), DemoOptions(), "s")
    (a,) = rep.evidence.details["assignments"]
    # effect 4 of the fixture is I/2 (the shared coarse-grained outcome)
    assert a["values"]["4"] == pytest.approx(0.5)


def test_missing_file_exit_2(tmp_path):
    assert main(["solve", "--problem", str(tmp_path / "none.json")]) == 2


def test_usage_error_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["solve"])
    assert exc.value.code == 2


def test_tol_flag_sets_env(monkeypatch):
    monkeypatch.delenv("NCWB_TOL", raising=False)
    assert main(["demo", "fair-coin", "--tol", "1e-8", "-q"]) == 0
    import os
    assert float(os.environ["NCWB_TOL"]) == 1e-8
    monkeypatch.delenv("NCWB_TOL")


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "ncwb.cli", "demo", "naimark-pair", "-q"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.strip() == "naimark-pair: reproduced"
