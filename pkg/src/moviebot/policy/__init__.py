from .actions import ACTION_COUNT, ACTION_INTENTS, AgentAction
from .mlp import DimensionError, Mlp, mlp_forward, mlp_grad
from .replay import DEFAULT_CAPACITY, ReplayBuffer, Transition
from .rules import RulePolicy, rule_policy_next
from .serialize import load_policy, save_policy
from .train import (
    A2CPolicy,
    ActorCriticNet,
    ConfigError,
    EpisodeRow,
    NumericalError,
    QPolicy,
    TrainConfig,
    TrainResult,
    a2c_train,
    dqn_train,
    epsilon_at,
    policy_act,
)
