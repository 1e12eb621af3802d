"""Episode metrics and logging tests."""

import json

import pytest

from moviebot import data_path
from moviebot.policy.rules import RulePolicy
from moviebot.rec.catalog import load_catalog
from moviebot.sim.env import DialogueEnv, RewardSpec
from moviebot.sim.metrics import (
    EmptyListError,
    EpisodeLog,
    Metrics,
    RandomPolicy,
    compute_metrics,
    export_logs,
    run_episodes,
)


def log(reward, success, utterances, tracker_failed=False):
    return EpisodeLog(
        seed=0,
        transcript=[],
        total_reward=reward,
        success=success,
        utterance_count=utterances,
        tracker_failed=tracker_failed,
    )


FIXTURE = [
    log(90.0, True, 10),
    log(-80.0, False, 20),
    log(-1000.0, False, 4, tracker_failed=True),
]


def test_metrics_fixture_values():
    m = compute_metrics(FIXTURE)
    assert m.R == -330.0
    assert abs(m.S - 100.0 / 3.0) <= 1e-9
    assert abs(m.U - 34.0 / 3.0) <= 1e-9
    assert abs(m.W - 100.0 / 3.0) <= 1e-9
    assert m.n == 3


def test_empty_logs_raise():
    with pytest.raises(EmptyListError):
        compute_metrics([])


def test_tracker_failure_cannot_be_success():
    with pytest.raises(ValueError):
        log(100.0, True, 5, tracker_failed=True)


def test_metrics_table_and_csv():
    m = Metrics(R=-330.0, S=33.3, U=11.33, W=33.3, n=3)
    table = m.table()
    assert "R" in table.splitlines()[0]
    assert "-330.00" in table.splitlines()[1]
    csv_text = m.csv()
    assert csv_text.splitlines()[0] == "R,S,U,W,n"
    assert csv_text.splitlines()[1].endswith(",3")


def test_episode_log_json_round_trip():
    entry = log(90.0, True, 10)
    payload = json.loads(entry.to_json())
    assert payload["reward"] == 90.0
    assert payload["success"] is True
    assert payload["utterances"] == 10


def test_export_logs_jsonl(tmp_path):
    path = tmp_path / "logs.jsonl"
    export_logs(FIXTURE, path)
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 3
    assert json.loads(lines[2])["tracker_failed"] is True


@pytest.fixture(scope="module")
def toy_env():
    catalog = load_catalog(data_path("toy_catalog.jsonl"))
    return DialogueEnv(
        catalog,
        reward=RewardSpec.default(),
        p_comply=1.0,
        p_remove=0.0,
    )


def test_run_episodes_rule_policy(toy_env):
    logs = run_episodes(toy_env, RulePolicy(), n=20, seed=0)
    assert len(logs) == 20
    assert [entry.seed for entry in logs] == list(range(20))
    m = compute_metrics(logs)
    assert m.S == 100.0
    assert m.W == 0.0
    assert all(entry.transcript for entry in logs)


def test_run_episodes_deterministic(toy_env):
    a = run_episodes(toy_env, RulePolicy(), n=5, seed=3)
    b = run_episodes(toy_env, RulePolicy(), n=5, seed=3)
    assert [x.total_reward for x in a] == [y.total_reward for y in b]
    assert [x.transcript for x in a] == [y.transcript for y in b]


def test_run_episodes_random_policy(toy_env):
    logs = run_episodes(toy_env, RandomPolicy(toy_env.action_count, seed=0), n=10)
    m = compute_metrics(logs)
    assert m.n == 10
    assert 0.0 <= m.S <= 100.0


def test_run_episodes_rejects_zero(toy_env):
    with pytest.raises(ValueError):
        run_episodes(toy_env, RulePolicy(), n=0)
