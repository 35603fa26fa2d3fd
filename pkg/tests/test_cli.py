"""The command-line surface: every subcommand plus exit-code conventions."""

import json

import pytest

from junta_lab import params as params_mod
from junta_lab.boolfn import TruthTable
from junta_lab.cli import main
from junta_lab.harness import desk_params
from junta_lab.params import derive_params


@pytest.fixture()
def desk10_file(tmp_path):
    path = tmp_path / "desk10.cfg"
    params_mod.save(desk_params(10), str(path))
    return str(path)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_gen_yes_and_dist(tmp_path, capsys, desk10_file):
    table_path = tmp_path / "f.tbl"
    code, out = run_cli(
        capsys,
        "gen", "--dist", "yes", "--params", desk10_file,
        "--seed", "11", "--emit-table", str(table_path),
    )
    assert code == 0
    info = json.loads(out)
    assert info["dist"] == "yes" and info["n"] == 10
    assert set(info["A"]).isdisjoint(info["M"])

    table = TruthTable.deserialize(table_path.read_text())
    assert table.n == 10

    code, out = run_cli(
        capsys, "dist", "--table", str(table_path), "--k", "7", "--eps", "0.1"
    )
    assert code == 0
    report = json.loads(out)
    assert report["denominator"] == 1024
    assert isinstance(report["far"], bool)
    assert len(report["witness"]) == 7


def test_gen_d2_deterministic(tmp_path, capsys, desk10_file):
    outputs = []
    for _ in range(2):
        code, out = run_cli(
            capsys, "gen", "--dist", "d2", "--params", desk10_file, "--seed", "3"
        )
        assert code == 0
        outputs.append(out)
    assert outputs[0] == outputs[1]
    assert json.loads(outputs[0])["ones"] == round(1024 * 0.1)


def test_game_sseq_mode(tmp_path, capsys, desk10_file):
    plan = tmp_path / "plan.json"
    plan.write_text(json.dumps({"ell": [4] * 8}))
    code, out = run_cli(
        capsys,
        "game", "--mode", "sseq", "--plan", str(plan),
        "--params", desk10_file, "--trials", "200", "--seed", "5",
    )
    assert code == 0
    result = json.loads(out)
    assert set(result) == {"advantage", "ci_low", "ci_high", "trials", "cost"}
    assert result["cost"] == 32
    assert result["ci_low"] <= result["advantage"] <= result["ci_high"]


def test_game_sssq_mode(tmp_path, capsys, desk10_file):
    plan = tmp_path / "plan.json"
    plan.write_text(json.dumps({"m": 5, "T": [[1, 2, 3], [2, 4]]}))
    code, out = run_cli(
        capsys,
        "game", "--mode", "sssq", "--plan", str(plan),
        "--params", desk10_file, "--trials", "100", "--seed", "5",
    )
    assert code == 0
    assert json.loads(out)["cost"] == 5


def test_game_strings_mode(tmp_path, capsys, desk10_file):
    plan = tmp_path / "plan.json"
    plan.write_text(
        json.dumps({"X": ["0000000000", "1000000000"], "decider": "all_equal_yes"})
    )
    code, out = run_cli(
        capsys,
        "game", "--mode", "strings", "--plan", str(plan),
        "--params", desk10_file, "--trials", "100", "--seed", "5",
    )
    assert code == 0
    assert json.loads(out)["cost"] == 2


def test_game_rejects_unknown_decider(tmp_path, capsys, desk10_file):
    plan = tmp_path / "plan.json"
    plan.write_text(json.dumps({"X": ["00"], "decider": "nope"}))
    code, _ = run_cli(
        capsys,
        "game", "--mode", "strings", "--plan", str(plan),
        "--params", desk10_file, "--trials", "10", "--seed", "5",
    )
    assert code == 2


def test_dtv_subcommand(capsys):
    code, out = run_cli(
        capsys, "dtv", "--c", "1", "--p", "0.5", "--q", "0.75", "--lambda", "1.0"
    )
    assert code == 0
    result = json.loads(out)
    assert result["dtv"] == 0.25
    assert result["tau"] == pytest.approx(0.25 * (3 / (2 * 0.25)) ** 0.5)
    assert result["bound"] is None or result["bound"] > 0


def test_verify_subcommand_writes_csv(tmp_path, capsys, desk10_file):
    out_path = tmp_path / "claim53.csv"
    code, out = run_cli(
        capsys,
        "verify", "--experiment", "claim53", "--params", desk10_file,
        "--trials", "1", "--seed", "1", "--out", str(out_path),
    )
    assert code == 0
    assert "PASS" in out
    lines = out_path.read_text().splitlines()
    assert lines[0] == "experiment,m,max_tv_gap"
    assert len(lines) == 4


def test_curve_subcommand(tmp_path, capsys, desk10_file):
    out_path = tmp_path / "curve.csv"
    code, out = run_cli(
        capsys,
        "curve", "--params", desk10_file, "--trials", "10",
        "--seed", "1", "--out", str(out_path),
    )
    assert code == 0
    body = out_path.read_text()
    assert body.splitlines()[0] == "experiment,m,budget,advantage,method"


def test_usage_errors_exit_2(tmp_path, capsys, desk10_file):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--experiment", "unknown", "--params", desk10_file])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 2
    # missing file is a clean error, not a traceback
    code = main(["dist", "--table", str(tmp_path / "missing.tbl"), "--k", "1"])
    assert code == 2


def test_cli_reproducibility(tmp_path, capsys, desk10_file):
    args = [
        "verify", "--experiment", "verify_yes", "--params", desk10_file,
        "--trials", "20", "--seed", "17", "--out", str(tmp_path / "a.csv"),
    ]
    assert main(args) == 0
    first = (tmp_path / "a.csv").read_bytes()
    args[-1] = str(tmp_path / "b.csv")
    assert main(args) == 0
    assert (tmp_path / "b.csv").read_bytes() == first
    capsys.readouterr()


def test_strict_params_file_round_trip(tmp_path, capsys):
    path = tmp_path / "strict.cfg"
    params_mod.save(derive_params(4096, 0.75, 0.1), str(path))
    loaded = params_mod.load(str(path))
    assert loaded.q == 0.6875
