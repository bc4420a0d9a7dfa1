"""Seeded multi-game benchmark platform.

Five game environments behind one turn-based contract, a multimodal
observation pipeline, agent connectors, diagnostic interventions, a
scoring engine with human/random normalization, and a human-play session
service.
"""

from .engine import EpisodeRunner, Environment, ReplayResult, create_env, replay, run_episode
from .interventions import InterventionConfig
from .metrics import ScoreReport, aggregate, game_final_score, nps, reliability, trimmed_mean
from .types import (
    ActionEnvelope,
    AudioPayload,
    Difficulty,
    EnvDescriptor,
    EpisodeRecord,
    GameId,
    ObservationBundle,
    Outcome,
)

__version__ = "0.1.0"

__all__ = [
    "EpisodeRunner",
    "Environment",
    "ReplayResult",
    "create_env",
    "replay",
    "run_episode",
    "InterventionConfig",
    "ScoreReport",
    "aggregate",
    "game_final_score",
    "nps",
    "reliability",
    "trimmed_mean",
    "ActionEnvelope",
    "AudioPayload",
    "Difficulty",
    "EnvDescriptor",
    "EpisodeRecord",
    "GameId",
    "ObservationBundle",
    "Outcome",
    "__version__",
]
