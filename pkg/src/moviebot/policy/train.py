"""DQN and A2C training loops over the episodic environment interface.

Environments expose ``reset(seed) -> obs``, ``step(action) -> (obs,
reward, done, info)``, ``observation_dim`` and ``action_count``. Training
is single-threaded and bit-reproducible under a fixed seed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .mlp import DimensionError, Mlp
from .replay import ReplayBuffer, Transition


class ConfigError(Exception):
    pass


class NumericalError(Exception):
    pass


@dataclass
class TrainConfig:
    episodes: int = 1000
    seed: int = 0
    gamma: float = 0.99
    learning_rate: float = 1e-3
    batch_size: int = 64
    buffer_capacity: int = 10000
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    # Steps over which epsilon decays linearly; None = half the step budget
    # estimated from episodes and the environment's max episode length.
    epsilon_decay_steps: int | None = None
    target_sync_every: int = 100
    hidden: tuple[int, int] = (64, 64)
    n_step: int = 5
    entropy_weight: float = 0.01
    value_loss_weight: float = 0.5

    def __post_init__(self):
        for name in ("gamma", "learning_rate"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ConfigError(f"{name} must be in (0, 1], got {v}")
        if self.episodes < 1:
            raise ConfigError("episodes must be >= 1")


@dataclass
class EpisodeRow:
    episode: int
    reward: float
    success: bool
    turns: int
    epsilon: float


@dataclass
class TrainResult:
    policy: object
    curve: list[EpisodeRow] = field(default_factory=list)

    def write_curve(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["episode", "reward", "success_flag", "turns", "epsilon"])
            for row in self.curve:
                writer.writerow(
                    [row.episode, f"{row.reward:.6f}", int(row.success), row.turns,
                     f"{row.epsilon:.6f}"]
                )


def epsilon_at(step: int, cfg: TrainConfig, decay_steps: int) -> float:
    if step >= decay_steps:
        return cfg.epsilon_end
    frac = step / decay_steps
    return cfg.epsilon_start + frac * (cfg.epsilon_end - cfg.epsilon_start)


class QPolicy:
    """Greedy policy over a trained Q network."""

    kind = "dqn"

    def __init__(self, net: Mlp, encoder_kind: str = "basic"):
        self.net = net
        self.encoder_kind = encoder_kind

    def act(self, observation) -> int:
        obs = np.asarray(observation, dtype=np.float64)
        if obs.shape[0] != self.net.layer_sizes[0]:
            raise DimensionError(
                f"observation dim {obs.shape[0]} != policy input {self.net.layer_sizes[0]}"
            )
        return int(np.argmax(self.net.forward(obs)))


def dqn_train(env, cfg: TrainConfig, encoder_kind: str = "basic") -> TrainResult:
    """Standard DQN: epsilon-greedy acting, uniform replay, target network."""
    obs_dim = env.observation_dim
    n_actions = env.action_count
    rng = np.random.default_rng(cfg.seed)
    net = Mlp([obs_dim, *cfg.hidden, n_actions], rng)
    target = net.copy()
    buffer = ReplayBuffer(cfg.buffer_capacity)

    decay_steps = cfg.epsilon_decay_steps
    if decay_steps is None:
        decay_steps = max(1, (cfg.episodes * env.max_episode_steps) // 2)

    curve: list[EpisodeRow] = []
    env_steps = 0
    grad_steps = 0
    for episode in range(cfg.episodes):
        obs = env.reset(seed=cfg.seed + episode)
        done = False
        total = 0.0
        turns = 0
        eps = epsilon_at(env_steps, cfg, decay_steps)
        info = {}
        while not done:
            eps = epsilon_at(env_steps, cfg, decay_steps)
            if rng.random() < eps:
                action = int(rng.integers(n_actions))
            else:
                action = int(np.argmax(net.forward(obs)))
            next_obs, reward, done, info = env.step(action)
            buffer.push(Transition(obs, action, reward, next_obs, done))
            obs = next_obs
            total += reward
            turns += 1
            env_steps += 1

            if len(buffer) >= cfg.batch_size:
                batch = buffer.sample(cfg.batch_size, rng)
                states = np.stack([t.obs for t in batch])
                next_states = np.stack([t.next_obs for t in batch])
                actions = np.array([t.action for t in batch])
                rewards = np.array([t.reward for t in batch])
                dones = np.array([t.done for t in batch], dtype=np.float64)

                q_next = target.forward(next_states).max(axis=1)
                targets = rewards + cfg.gamma * q_next * (1.0 - dones)

                activations = net.forward_cached(states)
                q_all = activations[-1]
                grad_out = np.zeros_like(q_all)
                idx = np.arange(len(batch))
                # Mean squared TD error; d/dq = (q - y) / B.
                grad_out[idx, actions] = (q_all[idx, actions] - targets) / len(batch)
                w_grads, b_grads = net.backward(activations, grad_out)
                net.sgd_step(w_grads, b_grads, cfg.learning_rate)
                grad_steps += 1
                if grad_steps % cfg.target_sync_every == 0:
                    target.copy_from(net)

        curve.append(
            EpisodeRow(episode, total, bool(info.get("success", False)), turns, eps)
        )
    return TrainResult(QPolicy(net, getattr(env, "encoder_kind", "basic")), curve)


class ActorCriticNet:
    """Shared relu trunk with softmax policy head and scalar value head."""

    LOGIT_CLIP = 30.0

    def __init__(self, obs_dim: int, n_actions: int, hidden, rng: np.random.Generator):
        sizes = [obs_dim, *hidden]
        self.trunk_w = []
        self.trunk_b = []
        for fan_in, fan_out in zip(sizes, sizes[1:]):
            self.trunk_w.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), (fan_in, fan_out)))
            self.trunk_b.append(np.zeros(fan_out))
        top = sizes[-1]
        self.policy_w = rng.normal(0.0, np.sqrt(2.0 / top), (top, n_actions))
        self.policy_b = np.zeros(n_actions)
        self.value_w = rng.normal(0.0, np.sqrt(2.0 / top), (top, 1))
        self.value_b = np.zeros(1)

    def params(self):
        return (
            self.trunk_w + self.trunk_b
            + [self.policy_w, self.policy_b, self.value_w, self.value_b]
        )

    def forward(self, x: np.ndarray):
        """Returns (hidden activations, logits, value)."""
        h = np.asarray(x, dtype=np.float64)
        acts = [h]
        for w, b in zip(self.trunk_w, self.trunk_b):
            h = np.maximum(h @ w + b, 0.0)
            acts.append(h)
        logits = h @ self.policy_w + self.policy_b
        if not np.all(np.isfinite(logits)):
            raise NumericalError("non-finite policy logits")
        logits = np.clip(logits, -self.LOGIT_CLIP, self.LOGIT_CLIP)
        value = float((h @ self.value_w + self.value_b)[0])
        return acts, logits, value

    def probs(self, logits: np.ndarray) -> np.ndarray:
        z = logits - logits.max()
        e = np.exp(z)
        return e / e.sum()

    def backward(self, acts, d_logits: np.ndarray, d_value: float):
        """Gradients of the combined loss wrt every parameter."""
        h = acts[-1]
        g_pw = np.outer(h, d_logits)
        g_pb = d_logits.copy()
        g_vw = (h * d_value)[:, None]
        g_vb = np.array([d_value])
        grad_h = self.policy_w @ d_logits + (self.value_w[:, 0] * d_value)
        g_tw, g_tb = [], []
        for i in range(len(self.trunk_w) - 1, -1, -1):
            grad_z = grad_h * (acts[i + 1] > 0.0)
            g_tw.append(np.outer(acts[i], grad_z))
            g_tb.append(grad_z.copy())
            grad_h = self.trunk_w[i] @ grad_z
        g_tw.reverse()
        g_tb.reverse()
        return g_tw + g_tb + [g_pw, g_pb, g_vw, g_vb]

    def apply(self, grads, lr: float) -> None:
        for p, g in zip(self.params(), grads):
            p -= lr * g


class A2CPolicy:
    """Greedy-mode policy over a trained actor-critic network."""

    kind = "a2c"

    def __init__(self, net: ActorCriticNet, encoder_kind: str = "basic"):
        self.net = net
        self.encoder_kind = encoder_kind

    def act(self, observation) -> int:
        obs = np.asarray(observation, dtype=np.float64)
        if obs.shape[0] != self.net.trunk_w[0].shape[0]:
            raise DimensionError(
                f"observation dim {obs.shape[0]} != policy input "
                f"{self.net.trunk_w[0].shape[0]}"
            )
        _, logits, _ = self.net.forward(obs)
        return int(np.argmax(self.net.probs(logits)))

    def action_probs(self, observation) -> np.ndarray:
        _, logits, _ = self.net.forward(np.asarray(observation, dtype=np.float64))
        return self.net.probs(logits)


def a2c_train(env, cfg: TrainConfig, encoder_kind: str = "basic") -> TrainResult:
    """Advantage actor-critic with n-step returns and an entropy bonus."""
    rng = np.random.default_rng(cfg.seed)
    net = ActorCriticNet(env.observation_dim, env.action_count, cfg.hidden, rng)

    curve: list[EpisodeRow] = []
    for episode in range(cfg.episodes):
        obs = env.reset(seed=cfg.seed + episode)
        done = False
        total = 0.0
        turns = 0
        info = {}
        segment = []  # (acts, logits, probs, value, action, reward)
        while not done:
            acts, logits, value = net.forward(obs)
            probs = net.probs(logits)
            action = int(rng.choice(len(probs), p=probs))
            next_obs, reward, done, info = env.step(action)
            segment.append((acts, logits, probs, value, action, reward))
            obs = next_obs
            total += reward
            turns += 1
            if len(segment) == cfg.n_step or done:
                _a2c_update(net, segment, obs, done, cfg)
                segment = []
        curve.append(EpisodeRow(episode, total, bool(info.get("success", False)), turns, 0.0))
    return TrainResult(A2CPolicy(net, getattr(env, "encoder_kind", "basic")), curve)


def _a2c_update(net: ActorCriticNet, segment, boot_obs, done: bool, cfg: TrainConfig):
    if done:
        ret = 0.0
    else:
        _, _, ret = net.forward(boot_obs)
    grads_total = None
    for acts, logits, probs, value, action, reward in reversed(segment):
        ret = reward + cfg.gamma * ret
        advantage = ret - value
        # Policy loss -log pi(a|s) * A - entropy bonus; gradient wrt logits.
        d_logits = probs.copy()
        d_logits[action] -= 1.0
        d_logits *= advantage
        # Entropy H = -sum p log p; dH/dlogits = -p * (log p + H).
        log_p = np.log(np.maximum(probs, 1e-12))
        entropy = -float(np.sum(probs * log_p))
        d_entropy = -probs * (log_p + entropy)
        d_logits -= cfg.entropy_weight * d_entropy
        # Value loss 0.5 * w * A^2 with a stop-gradient on the return.
        d_value = -cfg.value_loss_weight * advantage
        grads = net.backward(acts, d_logits, d_value)
        if grads_total is None:
            grads_total = grads
        else:
            for g_total, g in zip(grads_total, grads):
                g_total += g
    net.apply(grads_total, cfg.learning_rate / len(segment))


def policy_act(policy, observation) -> int:
    """Greedy action; ties resolve to the lowest action index."""
    return policy.act(observation)
