"""Episode logging and the R/S/U/W evaluation metrics."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


class EmptyListError(Exception):
    pass


@dataclass
class EpisodeLog:
    seed: int
    transcript: list[dict]
    total_reward: float
    success: bool
    utterance_count: int
    tracker_failed: bool

    def __post_init__(self):
        if self.tracker_failed and self.success:
            raise ValueError("a tracker failure cannot be a success")

    def to_json(self) -> str:
        return json.dumps(
            {
                "seed": self.seed,
                "transcript": self.transcript,
                "reward": self.total_reward,
                "success": self.success,
                "utterances": self.utterance_count,
                "tracker_failed": self.tracker_failed,
            }
        )


@dataclass(frozen=True)
class Metrics:
    """R: mean reward; S: success %; U: mean utterances; W: wrong-quit %."""

    R: float
    S: float
    U: float
    W: float
    n: int

    def table(self) -> str:
        header = f"{'R':>10} {'S (%)':>8} {'U':>8} {'W (%)':>8} {'n':>6}"
        row = f"{self.R:>10.2f} {self.S:>8.1f} {self.U:>8.2f} {self.W:>8.1f} {self.n:>6d}"
        return header + "\n" + row

    def csv(self) -> str:
        return "R,S,U,W,n\n" + f"{self.R:.6f},{self.S:.6f},{self.U:.6f},{self.W:.6f},{self.n}"


def _transcript_dicts(env) -> list[dict]:
    rows = []
    for utt in env.transcript:
        act = utt.acts[0]
        rows.append(
            {
                "speaker": utt.speaker,
                "text": utt.text,
                "intent": act.intent.value,
                "slots": [
                    {"slot": sv.slot.value, "value": sv.value, "polarity": sv.polarity}
                    for sv in act.slot_values
                ],
            }
        )
    return rows


class RandomPolicy:
    """Uniform-random baseline over the environment's action space."""

    kind = "random"

    def __init__(self, action_count: int, seed: int = 0):
        self.action_count = action_count
        self.rng = np.random.default_rng(seed)

    def act(self, observation) -> int:
        return int(self.rng.integers(self.action_count))


def run_episodes(env, policy, n: int, seed: int = 0) -> list[EpisodeLog]:
    """n independent greedy episodes; episode i runs under seed + i."""
    if n < 1:
        raise ValueError("n must be >= 1")
    logs = []
    for i in range(n):
        obs = env.reset(seed=seed + i)
        done = False
        total = 0.0
        info = {}
        while not done:
            if hasattr(policy, "act_on_state"):
                action = policy.act_on_state(env.state)
            else:
                action = policy.act(obs)
            obs, reward, done, info = env.step(action)
            total += reward
        logs.append(
            EpisodeLog(
                seed=seed + i,
                transcript=_transcript_dicts(env),
                total_reward=total,
                success=bool(info.get("success")),
                utterance_count=int(info.get("utterances", 0)),
                tracker_failed=bool(info.get("tracker_failed")),
            )
        )
    return logs


def compute_metrics(logs: list[EpisodeLog]) -> Metrics:
    if not logs:
        raise EmptyListError("metrics need at least one episode")
    n = len(logs)
    return Metrics(
        R=float(np.mean([log.total_reward for log in logs])),
        S=100.0 * sum(log.success for log in logs) / n,
        U=float(np.mean([log.utterance_count for log in logs])),
        W=100.0 * sum(log.tracker_failed for log in logs) / n,
        n=n,
    )


def export_logs(logs: list[EpisodeLog], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for log in logs:
            fh.write(log.to_json() + "\n")
