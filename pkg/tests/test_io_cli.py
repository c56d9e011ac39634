import json
import subprocess
import sys

import pytest

from cibmpe.cli import main
from cibmpe.errors import ValidationError
from cibmpe.game import validate_game_spec
from cibmpe.induction import solve_algorithm1, solve_algorithm2, solve_team_dp
from cibmpe.io import FIXTURES, dumps_result, game_to_json, load_game, load_result, parse_game, resolve_path

from support import fixture


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write_variant(tmp_path, name, change):
    data = json.loads((FIXTURES / "example_sec4d.game").read_text())
    change(data)
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def test_validate(capsys, tmp_path):
    code, out, _ = run(capsys, "validate", "example_sec4d")
    assert code == 0 and out.startswith("ok:") and "increments 16" in out
    missing = write_variant(tmp_path, "a.game", lambda d: d.pop("costs"))
    code, _, err = run(capsys, "validate", missing)
    assert code == 1 and "costs" in err
    no_kind = write_variant(tmp_path, "k.game", lambda d: d.pop("information_structure"))
    code, _, err = run(capsys, "validate", no_kind)
    assert code == 1 and "information_structure" in err
    bad = write_variant(tmp_path, "b.game", lambda d: d["transition"][0][1].__setitem__(0, ["1/2", "2/5"]))
    code, _, err = run(capsys, "validate", bad)
    assert code == 1 and "stage 1" in err and "9/10" in err
    broken = tmp_path / "c.game"
    broken.write_text("{not json")
    assert run(capsys, "validate", str(broken))[0] == 1
    assert run(capsys, "validate", str(tmp_path / "absent.game"))[0] == 1


@pytest.mark.parametrize("name", ["example_sec4d.game", "uncontrolled.game", "global_local_noisy.game",
                                  "single_controller_delay_b.game"])
def test_game_json_round_trip(name):
    loaded = load_game(FIXTURES / name)
    data = game_to_json(loaded.game, loaded.kind)
    spec, kind = parse_game(json.loads(json.dumps(data)))
    assert kind == loaded.kind
    assert game_to_json(validate_game_spec(spec), kind) == data


def test_fixture_names_resolve():
    assert resolve_path("example_sec4d") == FIXTURES / "example_sec4d.game"
    with pytest.raises(ValidationError):
        load_game("no_such_fixture_anywhere")


@pytest.mark.parametrize("solver", ["pure", "behavioral", "team"])
def test_result_round_trip(solver, tmp_path):
    name = "sec4d_team.game" if solver == "team" else "example_sec4d.game"
    g, s = fixture(name)
    r = {"pure": solve_algorithm1, "behavioral": solve_algorithm2, "team": solve_team_dp}[solver](g, s)
    text = dumps_result(r, g, s)
    assert dumps_result(r, g, s) == text
    path = tmp_path / "result.json"
    path.write_text(text)
    back = load_result(path, g, s)
    assert back.mode == r.mode
    assert back.values == r.values
    assert back.policy == r.policy
    assert dumps_result(back, g, s) == text


def test_solve_output_and_determinism(capsys, tmp_path):
    out_a, out_b = tmp_path / "a.json", tmp_path / "b.json"
    code, out, _ = run(capsys, "solve", "example_sec4d", "--out", str(out_a))
    assert code == 0 and out.strip().endswith("V1 = 97/180, V2 = 23/36")
    run(capsys, "solve", "example_sec4d", "--out", str(out_b), "--threads", "3")
    assert out_a.read_text() == out_b.read_text()
    code, out, _ = run(capsys, "solve", "example_sec4d", "--select", "file:sec4d_selection")
    assert code == 0 and "V1 = 47/60, V2 = 1/3" in out
    code, out, _ = run(capsys, "solve", "example_sec4d", "--report")
    assert "stage 2: 3 beliefs" in out and "selected equilibrium 0 of 3" in out


def test_solve_exit_codes(capsys):
    code, out, _ = run(capsys, "solve", "matching_pennies")
    assert code == 2 and "no pure equilibrium at stage 1" in out and "--mode behavioral" in out
    code, out, _ = run(capsys, "solve", "matching_pennies", "--mode", "behavioral")
    assert code == 0 and "V1 = 1/2, V2 = 1/2" in out
    code, out, _ = run(capsys, "solve", "example_sec4d", "--mode", "behavioral")
    assert code == 0 and out.startswith("V1 = ")
    code, out, _ = run(capsys, "solve", "example_sec4d", "--mode", "team")
    assert code == 1 and "not a team problem" in out
    code, out, _ = run(capsys, "solve", "sec4d_team", "--mode", "team")
    assert code == 0 and "V1 = 0/1, V2 = 0/1" in out
    code, out, _ = run(capsys, "solve", "two_step_delay")
    assert code == 3 and "independence fail" in out
    code, _, err = run(capsys, "solve", "two_step_delay", "--mode", "behavioral", "--force-independence")
    assert code == 0 and "WARNING" in err
    code, out, _ = run(capsys, "solve", "example_sec4d_T4", "--budget", "2")
    assert code == 4
    code, _, err = run(capsys, "solve", "example_sec4d", "--select", "index:9")
    assert code == 1 and "index 9" in err


def test_check_independence(capsys):
    code, out, _ = run(capsys, "check-independence", "example_sec4d_T4")
    assert code == 0 and "independence pass" in out and "R1=1 R2=3 R3=3 R4=3" in out
    code, out, _ = run(capsys, "check-independence", "two_step_delay", "--behavioral-samples", "2")
    assert code == 1 and "pair A" in out
    code, out, _ = run(capsys, "check-independence", "example_sec4d_T4", "--budget", "2")
    assert code == 4 and "inconclusive" in out


def test_enumerate(capsys):
    code, out, _ = run(capsys, "enumerate", "example_sec4d_T1")
    assert code == 0 and out.strip() == "R1=1"
    code, out, _ = run(capsys, "enumerate", "example_sec4d_T4")
    assert out.strip() == "R1=1 R2=3 R3=3 R4=3"
    code, out, _ = run(capsys, "enumerate", "example_sec4d", "--mode", "general", "--graph")
    assert code == 0 and len(out.splitlines()) > 4
    code, out, _ = run(capsys, "enumerate", "example_sec4d_T4", "--budget", "2")
    assert code == 4 and "inconclusive" in out


def test_verify(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "example_sec4d", "--profile", str(FIXTURES / "sec4d_result.json"))
    assert code == 0 and "nash pass" in out and "stage conditions pass" in out
    code, out, _ = run(capsys, "verify", "example_sec4d", "--profile", str(FIXTURES / "sec4d_tampered.json"))
    assert code == 1 and "gap = 19/120" in out
    team = tmp_path / "team.json"
    run(capsys, "solve", "sec4d_team", "--mode", "team", "--out", str(team))
    code, out, _ = run(capsys, "verify", "sec4d_team", "--profile", str(team))
    assert code == 0 and "nash pass" in out
    beh = tmp_path / "beh.json"
    run(capsys, "solve", "matching_pennies", "--mode", "behavioral", "--out", str(beh))
    code, out, _ = run(capsys, "verify", "matching_pennies", "--profile", str(beh))
    assert code == 0
    code, _, err = run(capsys, "verify", "matching_pennies", "--profile", str(FIXTURES / "sec4d_result.json"))
    assert code == 1 and err.startswith("error:")


def test_thread_setting(capsys, monkeypatch):
    monkeypatch.setenv("CIBMPE_THREADS", "2")
    code, out, _ = run(capsys, "enumerate", "example_sec4d_T4")
    assert code == 0 and out.strip() == "R1=1 R2=3 R3=3 R4=3"
    monkeypatch.setenv("CIBMPE_THREADS", "many")
    code, _, err = run(capsys, "enumerate", "example_sec4d_T4")
    assert code == 1 and "CIBMPE_THREADS" in err


def test_module_entry_point():
    done = subprocess.run([sys.executable, "-m", "cibmpe", "solve", "example_sec4d", "--select",
                           "file:sec4d_selection"], capture_output=True, text=True, timeout=60)
    assert done.returncode == 0
    assert done.stdout.strip() == "V1 = 47/60, V2 = 1/3"
