"""User simulation, training environments, and evaluation metrics."""

from .env import DialogueEnv, RewardSpec
from .metrics import (
    EmptyListError,
    EpisodeLog,
    Metrics,
    RandomPolicy,
    compute_metrics,
    export_logs,
    run_episodes,
)
from .profile import (
    DEFAULT_P_COMPLY,
    DEFAULT_P_REMOVE,
    DEFAULT_PATIENCE,
    EmptyCatalogError,
    UserProfile,
    sample_profile,
)
from .render import render_user_text
from .simulator import Agenda, InactiveEpisodeError, UserSimulator

__all__ = [
    "DialogueEnv",
    "RewardSpec",
    "EmptyListError",
    "EpisodeLog",
    "Metrics",
    "RandomPolicy",
    "compute_metrics",
    "export_logs",
    "run_episodes",
    "DEFAULT_P_COMPLY",
    "DEFAULT_P_REMOVE",
    "DEFAULT_PATIENCE",
    "EmptyCatalogError",
    "UserProfile",
    "sample_profile",
    "render_user_text",
    "Agenda",
    "InactiveEpisodeError",
    "UserSimulator",
]
