"""Command-line interface tests via subprocess."""

import subprocess
import sys

import pytest

from moviebot import data_path

CLI = [sys.executable, "-m", "moviebot.cli"]


def run_cli(*argv, stdin: str = "", timeout: int = 120):
    return subprocess.run(
        CLI + list(argv),
        input=stdin,
        capture_output=True,
        text=True,
        timeout=timeout,
    )


def test_no_subcommand_is_usage_error():
    proc = run_cli()
    assert proc.returncode == 2


def test_missing_catalog_exit_code():
    proc = run_cli("eval-policy", "--catalog", "/nonexistent/catalog.jsonl")
    assert proc.returncode == 2
    assert "--catalog" in proc.stderr


def test_broken_catalog_is_data_error(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("this is not json\n")
    proc = run_cli("eval-policy", "--catalog", str(bad), "--episodes", "1")
    assert proc.returncode == 3
    assert "--catalog" in proc.stderr


def test_crf_engine_requires_model():
    proc = run_cli("eval-nlu", "--engine", "crf")
    assert proc.returncode == 2
    assert "--nlu-model" in proc.stderr


def test_resolved_config_printed():
    proc = run_cli("eval-nlu", "--n-per-intent", "1", "--n-per-slot", "1")
    assert proc.returncode == 0
    assert "resolved config:" in proc.stdout
    assert "seed = 0" in proc.stdout


def test_chat_golden_transcript():
    script = "hello\ni want a comedy movie\n/model\n/state\n/quit\n"
    proc = run_cli(
        "chat", "--catalog", str(data_path("toy_catalog.jsonl")), stdin=script
    )
    assert proc.returncode == 0
    out = proc.stdout
    assert out.count("agent>") >= 3  # welcome + replies
    assert "recommendation>" in out
    assert "You like comedy movies." in out
    assert "frame" in out  # /state dump shows tracker fields


def test_chat_deterministic_byte_identical():
    script = "hello\ni want a comedy movie\nwhat else do you have\n/quit\n"
    args = ("chat", "--catalog", str(data_path("toy_catalog.jsonl")), "--seed", "5")
    a = run_cli(*args, stdin=script)
    b = run_cli(*args, stdin=script)
    assert a.returncode == b.returncode == 0
    assert a.stdout == b.stdout


def test_gen_corpus_and_eval_nlu(tmp_path):
    out = tmp_path / "corpus.tsv"
    proc = run_cli(
        "gen-corpus", "--n-per-intent", "2", "--n-per-slot", "2", "--out", str(out)
    )
    assert proc.returncode == 0
    assert out.exists()
    n_lines = len(out.read_text().strip().splitlines())
    assert f"wrote {n_lines} records" in proc.stdout

    proc = run_cli("eval-nlu", "--corpus", str(out))
    assert proc.returncode == 0
    assert f"evaluated {n_lines} records" in proc.stdout
    assert "intent" in proc.stdout and "slot" in proc.stdout


def test_train_and_eval_policy_round_trip(tmp_path):
    policy_path = tmp_path / "policy.bin"
    curve_path = tmp_path / "curve.csv"
    proc = run_cli(
        "train-policy",
        "--algo", "dqn",
        "--episodes", "30",
        "--catalog", str(data_path("toy_catalog.jsonl")),
        "--out", str(policy_path),
        "--curve", str(curve_path),
        timeout=300,
    )
    assert proc.returncode == 0, proc.stderr
    assert policy_path.exists()
    assert curve_path.read_text().startswith("episode,reward,success_flag")

    csv_path = tmp_path / "metrics.csv"
    proc = run_cli(
        "eval-policy",
        "--policy", str(policy_path),
        "--episodes", "5",
        "--catalog", str(data_path("toy_catalog.jsonl")),
        "--random-baseline",
        "--csv", str(csv_path),
        timeout=300,
    )
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.count("policy:") == 2
    assert csv_path.read_text().startswith("R,S,U,W,n")


def test_policy_dimension_mismatch_is_data_error(tmp_path):
    policy_path = tmp_path / "policy.bin"
    proc = run_cli(
        "train-policy",
        "--algo", "dqn",
        "--episodes", "5",
        "--encoder", "with_intents",
        "--catalog", str(data_path("toy_catalog.jsonl")),
        "--out", str(policy_path),
        timeout=300,
    )
    assert proc.returncode == 0, proc.stderr
    proc = run_cli(
        "eval-policy",
        "--policy", str(policy_path),
        "--encoder", "basic",
        "--episodes", "1",
        "--catalog", str(data_path("toy_catalog.jsonl")),
    )
    assert proc.returncode == 3
    assert "30" in proc.stderr and "10" in proc.stderr


def test_unknown_algo_is_usage_error(tmp_path):
    proc = run_cli(
        "train-policy", "--algo", "sarsa", "--out", str(tmp_path / "x.bin")
    )
    assert proc.returncode == 2


def test_train_nlu_writes_model(tmp_path):
    model_path = tmp_path / "nlu.crf"
    proc = run_cli(
        "train-nlu",
        "--n-per-intent", "2",
        "--n-per-slot", "2",
        "--epochs", "2",
        "--out", str(model_path),
        timeout=300,
    )
    assert proc.returncode == 0, proc.stderr
    assert model_path.exists()
    assert (tmp_path / "nlu.crf.json").exists()

    proc = run_cli(
        "eval-nlu",
        "--engine", "crf",
        "--nlu-model", str(model_path),
        "--n-per-intent", "2",
        "--n-per-slot", "2",
        timeout=300,
    )
    assert proc.returncode == 0, proc.stderr
    assert "crf" in proc.stdout
