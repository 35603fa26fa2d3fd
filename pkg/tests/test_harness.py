"""Experiment runners: games, verification suites, sweeps, and reporting."""

import math

import numpy as np
import pytest

from junta_lab.boolfn import BitString, TruthTable
from junta_lab.errors import InvalidInput, TooLarge
from junta_lab.hardgen import RandomStream, Seed, sample_yes
from junta_lab.harness import (
    DECIDERS,
    EXPERIMENTS,
    SET_GAME_ADVANTAGE,
    CheckResult,
    ExperimentConfig,
    ExperimentReport,
    GameResult,
    all_equal_yes,
    all_zero_yes,
    always_yes,
    desk_params,
    random_string_plan,
    run_all,
    run_experiment,
    run_game,
    write_atomic,
)
from junta_lab.tasks import NO, YES, StringQueryPlan


def test_decider_registry():
    assert set(DECIDERS) == {
        "always_yes",
        "always_no",
        "all_zero_yes",
        "all_equal_yes",
        "parity_yes",
    }
    assert all_zero_yes((0, 0)) == YES and all_zero_yes((0, 1)) == NO
    assert all_equal_yes((1, 1, 1)) == YES and all_equal_yes((1, 0)) == NO


def constant_sampler(n, bit):
    table = TruthTable.constant(n, bit)
    return lambda seed: table


def test_run_game_constant_decider():
    plan = random_string_plan(4, 3, RandomStream(Seed(1), "p"), always_yes)
    result = run_game(constant_sampler(4, 0), constant_sampler(4, 1), plan, 400, 7)
    assert result.advantage == 0.0
    assert result.ci_low <= 0.0 <= result.ci_high
    assert result.trials_yes + result.trials_no == 400
    assert result.cost == 3


def test_run_game_identical_samplers():
    params = desk_params(6)
    plan = random_string_plan(6, 2, RandomStream(Seed(2), "p"), all_equal_yes)
    gen = lambda seed: sample_yes(params, seed)
    result = run_game(gen, gen, plan, 2000, 11)
    assert result.ci_low <= 0.0 <= result.ci_high


def test_run_game_single_query_bit_decider():
    # a single query returns an unbiased bit under both samplers, so the
    # exact advantage (by enumerating address and pool conditioning) is 0
    params = desk_params(6)
    x = BitString.from_text("010101")
    plan = StringQueryPlan(queries=(x,), decider=lambda bits: YES if bits[0] else NO)
    from junta_lab.hardgen import sample_no

    result = run_game(
        lambda s: sample_yes(params, s),
        lambda s: sample_no(params, s),
        plan,
        4000,
        13,
    )
    assert result.ci_low <= 0.0 <= result.ci_high


def test_game_result_json_shape():
    result = GameResult(0.1, 0.0, 0.2, 10, 10, 3, 0.5)
    assert result.as_json_dict() == {
        "advantage": 0.1,
        "ci_low": 0.0,
        "ci_high": 0.2,
        "trials": 20,
        "cost": 3,
    }


def test_experiment_config_validation():
    params = desk_params(10)
    with pytest.raises(InvalidInput):
        ExperimentConfig(params=params, experiment="bogus", trials=10, seed=0)
    with pytest.raises(InvalidInput):
        ExperimentConfig(params=params, experiment="claim53", trials=0, seed=0)
    assert set(EXPERIMENTS) >= {"verify_yes", "verify_no", "game", "claim53", "goodM"}


def test_verify_yes_small():
    cfg = ExperimentConfig(params=desk_params(8), experiment="verify_yes", trials=60, seed=5)
    report = run_experiment(cfg)
    assert report.passed
    row = report.rows[0]
    assert row["containment_fraction"] == 1.0
    assert 0.0 <= row["junta_fraction"] <= 1.0


def test_verify_yes_cap():
    cfg = ExperimentConfig(params=desk_params(12), experiment="verify_yes", trials=5, seed=5)
    with pytest.raises(TooLarge):
        run_experiment(cfg)


def test_verify_no_small():
    cfg = ExperimentConfig(params=desk_params(10), experiment="verify_no", trials=40, seed=5)
    report = run_experiment(cfg)
    assert report.passed
    row = report.rows[0]
    assert row["far_fraction_no"] >= row["far_fraction_yes"]
    assert row["expected_pool_gap"] == pytest.approx(
        (cfg.params.q - cfg.params.p) * cfg.params.m
    )


def test_verify_d1_small():
    cfg = ExperimentConfig(
        params=desk_params(10, epsilon=0.05), experiment="verify_d1", trials=25, seed=5
    )
    report = run_experiment(cfg)
    assert report.passed
    assert report.rows[0]["certified_fraction"] > 0.9
    assert report.rows[0]["far_fraction"] >= report.rows[0]["certified_fraction"]


def test_verify_d2_small():
    # weight 2^n * eps = 8: sparse enough that ones rarely collide
    cfg = ExperimentConfig(
        params=desk_params(10, epsilon=2.0**-7), experiment="verify_d2", trials=25, seed=5
    )
    report = run_experiment(cfg)
    assert report.passed
    assert report.rows[0]["certified_fraction"] > 0.5


def test_budget_game_small():
    cfg = ExperimentConfig(
        params=desk_params(14, epsilon=0.01), experiment="game", trials=1000, seed=5
    )
    report = run_experiment(cfg)
    assert report.passed
    row = report.rows[0]
    assert row["budget"] == 3
    assert row["ci_high"] < SET_GAME_ADVANTAGE


def test_sseq_curve_small():
    cfg = ExperimentConfig(params=desk_params(10), experiment="sseq_curve", trials=10, seed=5)
    report = run_experiment(cfg)
    assert report.passed
    advantages = [row["advantage"] for row in report.rows]
    assert advantages[0] == 0.0
    assert all(b >= a - 1e-12 for a, b in zip(advantages, advantages[1:]))
    assert all(row["method"] == "exact" for row in report.rows)


def test_dtv_sweep_passes():
    cfg = ExperimentConfig(params=desk_params(10), experiment="dtv_sweep", trials=1, seed=5)
    report = run_experiment(cfg)
    assert report.passed
    curve = [row["scaled_dtv"] for row in report.rows if row["section"] == "scale_curve"]
    assert len(curve) == 3
    assert curve[0] > curve[1] > curve[2]


def test_claim53_passes():
    cfg = ExperimentConfig(params=desk_params(10), experiment="claim53", trials=1, seed=5)
    report = run_experiment(cfg)
    assert report.passed


def test_good_m_passes():
    cfg = ExperimentConfig(params=desk_params(12), experiment="goodM", trials=500, seed=5)
    report = run_experiment(cfg)
    assert report.passed
    row = report.rows[0]
    assert row["bad_fraction"] <= row["union_bound"] + 3 * row["sigma"]


def test_reports_serialize_to_stable_csv(tmp_path):
    out = tmp_path / "report.csv"
    cfg = ExperimentConfig(
        params=desk_params(8), experiment="verify_yes", trials=25, seed=9,
        output_path=str(out),
    )
    code1, _ = run_all(cfg)
    first = out.read_bytes()
    code2, _ = run_all(cfg)
    assert code1 == code2 == 0
    assert out.read_bytes() == first
    text = first.decode()
    header = text.splitlines()[0].split(",")
    assert header[0] == "experiment"


def test_csv_float_formatting():
    report = ExperimentReport("demo")
    report.rows.append({"a": 1 / 3, "b": True, "c": 7})
    text = report.csv_text()
    assert text.splitlines()[0] == "a,b,c"
    assert text.splitlines()[1] == "0.333333333333,true,7"


def test_failure_reporting(tmp_path):
    report = ExperimentReport("demo")
    report.checks.append(CheckResult("ok", True, ""))
    report.checks.append(CheckResult("broken", False, "numbers disagree"))
    assert not report.passed
    failure = report.failure_dict()
    assert failure["failed_checks"] == [{"name": "broken", "detail": "numbers disagree"}]


def test_write_atomic(tmp_path):
    target = tmp_path / "x.txt"
    write_atomic(str(target), "payload")
    assert target.read_text() == "payload"
    assert not (tmp_path / "x.txt.tmp").exists()
