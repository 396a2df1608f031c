import json

import numpy as np
import pytest

from monogamy import cli, extendibility
from monogamy.cli import load_measurements, load_state, run, save_measurements, save_state
from monogamy.extendibility import verify_extension
from monogamy.states import bdsw_tripartite, max_entangled

from helpers import random_qubit_projective


def run_json(capsys, argv):
    code = run(argv)
    out = capsys.readouterr().out.strip()
    return code, json.loads(out) if out else None


def test_gen_round_trip_is_exact(tmp_path, capsys):
    path = tmp_path / "phi.json"
    code, report = run_json(capsys, ["gen", "phi_plus", "-o", str(path)])
    assert code == 0
    assert report["dims"] == [2, 2]
    loaded = load_state(str(path))
    assert np.array_equal(loaded.mat, max_entangled(2).mat)


@pytest.mark.parametrize(
    "argv",
    [
        ["gen", "werner", "--p", "0.3"],
        ["gen", "bush_rumsfeld", "--epsilon", "0.1"],
        ["gen", "bdsw"],
        ["gen", "random", "--dims", "2,2", "--seed", "9"],
    ],
)
def test_gen_variants_load_back(tmp_path, capsys, argv):
    path = tmp_path / "state.json"
    code, _ = run_json(capsys, argv + ["-o", str(path)])
    assert code == 0
    load_state(str(path))


def test_usage_errors_exit_2(capsys):
    assert run(["extend", "whatever.json", "--k", "1"]) == 2
    assert run(["nonsense"]) == 2
    assert run(["gen", "werner"]) == 2  # missing -o
    capsys.readouterr()


def test_validation_errors_exit_3(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    payload = {"dims": [2], "matrix": [[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.4, 0.0]]]}
    bad.write_text(json.dumps(payload))
    assert run(["ppt", str(bad)]) == 3
    err = capsys.readouterr().err
    assert "trace" in err and "1.000e-01" in err

    shape = tmp_path / "shape.json"
    payload = {"dims": [2, 2], "matrix": [[[1.0, 0.0]] * 3] * 3}
    shape.write_text(json.dumps(payload))
    assert run(["ppt", str(shape)]) == 3
    assert run(["ppt", str(tmp_path / "missing.json")]) == 3
    capsys.readouterr()


def test_extend_phi_plus_reports_infeasible(tmp_path, capsys):
    path = tmp_path / "phi.json"
    run(["gen", "phi_plus", "-o", str(path)])
    capsys.readouterr()
    code, report = run_json(capsys, ["extend", str(path), "--k", "2"])
    assert code == 0
    assert report["status"] == "infeasible"
    assert report["margin"] < 0
    assert report["input"]["sha256"]


def test_extend_bdsw_marginal_writes_verifiable_witness(tmp_path, capsys):
    state = tmp_path / "bdsw.json"
    witness = tmp_path / "witness.json"
    run(["gen", "bdsw", "-o", str(state)])
    capsys.readouterr()
    code, report = run_json(
        capsys, ["extend", str(state), "--trace-out", "2", "--k", "2", "--witness", str(witness)]
    )
    assert code == 0
    assert report["status"] == "feasible"
    assert report["witness_path"] == str(witness)
    loaded = load_state(str(witness))
    marginal = bdsw_tripartite().partial_trace([2])
    assert verify_extension(loaded, marginal, 2, "perm")


def test_reports_deterministic_up_to_wall_clock(tmp_path, capsys):
    path = tmp_path / "w.json"
    run(["gen", "werner", "--p", "0.8", "-o", str(path)])
    capsys.readouterr()
    _, first = run_json(capsys, ["extend", str(path), "--k", "2"])
    _, second = run_json(capsys, ["extend", str(path), "--k", "2"])
    first.pop("wall_clock_s")
    second.pop("wall_clock_s")
    assert first == second


def test_hierarchy_command_and_cap_env(tmp_path, capsys, monkeypatch):
    path = tmp_path / "w.json"
    run(["gen", "werner", "--p", "0.1", "-o", str(path)])
    capsys.readouterr()
    code, report = run_json(capsys, ["hierarchy", str(path), "--kmax", "3"])
    assert code == 0
    assert [level["k"] for level in report["levels"]] == [2, 3]
    assert not report["truncated"]

    monkeypatch.setenv("MONOGAMY_MAX_DIM", "8")
    code, report = run_json(capsys, ["hierarchy", str(path), "--kmax", "3"])
    assert code == 0
    assert [level["k"] for level in report["levels"]] == [2]
    assert report["truncated"]
    assert report["notices"]


def test_negativity_and_chsh_commands(tmp_path, capsys):
    path = tmp_path / "phi.json"
    run(["gen", "phi_plus", "-o", str(path)])
    capsys.readouterr()
    code, report = run_json(capsys, ["negativity", str(path)])
    assert code == 0
    assert abs(report["negativity"] - 0.5) < 1e-11
    code, report = run_json(capsys, ["chsh", str(path)])
    assert code == 0
    assert abs(report["chsh_max"] - 2 * np.sqrt(2)) < 1e-9
    assert report["violates_local_bound"] is True


def test_lhv_command_end_to_end(tmp_path, capsys):
    state = tmp_path / "bdsw_marginal.json"
    run(["gen", "bdsw", "-o", str(tmp_path / "bdsw.json")])
    capsys.readouterr()
    save_state(bdsw_tripartite().partial_trace([2]), str(state))
    rng = np.random.default_rng(77)
    alice_path = tmp_path / "alice.json"
    bob_path = tmp_path / "bob.json"
    save_measurements([random_qubit_projective(rng) for _ in range(3)], str(alice_path))
    save_measurements([random_qubit_projective(rng) for _ in range(2)], str(bob_path))
    code, report = run_json(
        capsys,
        ["lhv", str(state), "--k", "2", "--alice", str(alice_path), "--bob", str(bob_path)],
    )
    assert code == 0
    assert report["extendibility"] == "feasible"
    assert report["model"]["hidden_variables"] == 4
    assert report["model"]["table_max_deviation"] <= 1e-8
    # measurement count must match k
    assert run(["lhv", str(state), "--k", "3", "--alice", str(alice_path), "--bob", str(bob_path)]) == 3
    capsys.readouterr()


def test_measurement_file_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    povms = [random_qubit_projective(rng) for _ in range(2)]
    path = tmp_path / "m.json"
    save_measurements(povms, str(path))
    loaded = load_measurements(str(path))
    for orig, back in zip(povms, loaded):
        for a, b in zip(orig.elements, back.elements):
            assert np.array_equal(a, b)


def test_strict_flag_turns_borderline_into_exit_4(tmp_path, capsys, monkeypatch):
    path = tmp_path / "w.json"
    run(["gen", "werner", "--p", "0.5", "-o", str(path)])
    capsys.readouterr()
    fake = extendibility.ExtendibilityResult("borderline", 0.0, 2, "perm")
    monkeypatch.setattr(cli.extendibility, "check_extendible", lambda *a, **k: fake)
    assert run(["extend", str(path), "--k", "2", "--strict"]) == 4
    assert run(["extend", str(path), "--k", "2"]) == 0
    capsys.readouterr()
