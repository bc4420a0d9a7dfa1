from ..types import GameId
from .base import HISTORY_WINDOW, AgentConnector, FailingAgent, ScriptedAgent, TransportError
from .oracles import (
    EchoesOracle,
    MelodyOracle,
    PathfindingOracle,
    PhantomPlanner,
    ShowdownSurvivor,
    oracle_agent,
)
from .random_agent import RandomAgent
from .remote import EndpointConfig, RemoteAgent


def make_agent(spec: dict, game_id: GameId) -> AgentConnector:
    """Build a connector from a config spec: {"type": ..., ...}."""
    kind = spec.get("type", "random")
    if kind == "random":
        return RandomAgent(game_id, seed=int(spec.get("seed", 0)))
    if kind == "oracle":
        return oracle_agent(game_id)
    if kind == "scripted":
        return ScriptedAgent(list(spec.get("replies", [])), agent_id=spec.get("agent_id", "scripted"))
    if kind == "remote":
        return RemoteAgent(EndpointConfig.from_dict(spec), agent_id=spec.get("agent_id"))
    raise ValueError(f"unknown agent type: {kind!r}")


__all__ = [
    "HISTORY_WINDOW",
    "AgentConnector",
    "FailingAgent",
    "ScriptedAgent",
    "TransportError",
    "EchoesOracle",
    "MelodyOracle",
    "PathfindingOracle",
    "PhantomPlanner",
    "ShowdownSurvivor",
    "oracle_agent",
    "RandomAgent",
    "EndpointConfig",
    "RemoteAgent",
    "make_agent",
]
