"""Replay buffer, epsilon schedule, and policy serialization tests."""

import numpy as np
import pytest

from moviebot.policy.mlp import DimensionError, Mlp
from moviebot.policy.replay import ReplayBuffer, Transition
from moviebot.policy.serialize import load_policy, save_policy
from moviebot.policy.train import (
    A2CPolicy,
    ActorCriticNet,
    ConfigError,
    QPolicy,
    TrainConfig,
    epsilon_at,
    policy_act,
)


def transition(i):
    return Transition(np.array([float(i)]), i % 2, float(i), np.array([float(i + 1)]), False)


def test_replay_ring_overwrites_oldest():
    buf = ReplayBuffer(capacity=3)
    for i in range(5):
        buf.push(transition(i))
    assert len(buf) == 3
    held = {t.reward for t in buf._items}
    assert held == {2.0, 3.0, 4.0}


def test_replay_sample_uniform_and_seeded():
    buf = ReplayBuffer(capacity=10)
    for i in range(10):
        buf.push(transition(i))
    a = buf.sample(6, np.random.default_rng(0))
    b = buf.sample(6, np.random.default_rng(0))
    assert [t.reward for t in a] == [t.reward for t in b]


def test_replay_rejects_bad_capacity():
    with pytest.raises(ValueError):
        ReplayBuffer(0)


def test_epsilon_linear_decay():
    cfg = TrainConfig(epsilon_start=1.0, epsilon_end=0.05)
    assert epsilon_at(0, cfg, 100) == 1.0
    assert abs(epsilon_at(50, cfg, 100) - 0.525) < 1e-12
    assert epsilon_at(100, cfg, 100) == 0.05
    assert epsilon_at(10_000, cfg, 100) == 0.05


def test_config_validation():
    with pytest.raises(ConfigError):
        TrainConfig(gamma=0.0)
    with pytest.raises(ConfigError):
        TrainConfig(learning_rate=2.0)
    with pytest.raises(ConfigError):
        TrainConfig(episodes=0)


def test_config_defaults():
    cfg = TrainConfig()
    assert cfg.gamma == 0.99
    assert cfg.learning_rate == 1e-3
    assert cfg.batch_size == 64
    assert cfg.buffer_capacity == 10000
    assert cfg.target_sync_every == 100
    assert cfg.hidden == (64, 64)
    assert cfg.n_step == 5
    assert cfg.entropy_weight == 0.01
    assert cfg.value_loss_weight == 0.5


def test_qpolicy_greedy_and_dim_check():
    net = Mlp([3, 4, 2], rng=np.random.default_rng(0))
    policy = QPolicy(net, "basic")
    obs = np.array([1.0, 0.0, 0.0])
    assert policy.act(obs) == int(np.argmax(net.forward(obs)))
    with pytest.raises(DimensionError):
        policy.act(np.ones(4))
    assert policy_act(policy, obs) == policy.act(obs)


def test_a2c_policy_probs_sum_to_one():
    net = ActorCriticNet(3, 9, (8, 8), np.random.default_rng(0))
    policy = A2CPolicy(net, "basic")
    probs = policy.action_probs(np.ones(3))
    assert abs(probs.sum() - 1.0) <= 1e-9
    assert policy.act(np.ones(3)) == int(np.argmax(probs))
    with pytest.raises(DimensionError):
        policy.act(np.ones(5))


def test_uniform_logits_entropy():
    net = ActorCriticNet(3, 9, (8,), np.random.default_rng(0))
    probs = net.probs(np.zeros(9))
    entropy = -float(np.sum(probs * np.log(probs)))
    assert abs(entropy - np.log(9)) <= 1e-12


def test_save_load_dqn_round_trip(tmp_path):
    net = Mlp([10, 6, 9], rng=np.random.default_rng(1))
    policy = QPolicy(net, "basic")
    path = str(tmp_path / "policy.bin")
    save_policy(policy, path)
    loaded = load_policy(path)
    assert loaded.kind == "dqn"
    assert loaded.encoder_kind == "basic"
    obs = np.random.default_rng(2).random(10)
    assert np.array_equal(loaded.net.forward(obs), net.forward(obs))


def test_save_load_a2c_round_trip(tmp_path):
    net = ActorCriticNet(30, 9, (16, 16), np.random.default_rng(3))
    policy = A2CPolicy(net, "with_intents")
    path = str(tmp_path / "policy.bin")
    save_policy(policy, path)
    loaded = load_policy(path)
    assert loaded.kind == "a2c"
    assert loaded.encoder_kind == "with_intents"
    obs = np.random.default_rng(4).random(30)
    assert np.allclose(loaded.action_probs(obs), policy.action_probs(obs))


def test_load_rejects_garbage(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"not a policy file")
    with pytest.raises(Exception):
        load_policy(str(path))
