"""Agent connector contract and scripted test agents."""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import TYPE_CHECKING, Optional

from ..types import ObservationBundle

if TYPE_CHECKING:
    from ..engine import Environment

# Turns of (prompt, reply) context handed to connectors; truncation is
# oldest-first.
HISTORY_WINDOW = 8


class TransportError(RuntimeError):
    """Remote agent unreachable after bounded retries; aborts the episode."""


class AgentConnector(ABC):
    """Boundary between the harness and any decision-maker.

    Connectors are stateless across episodes unless they explicitly hold
    per-episode memory (reset in `begin_episode`). Replies are logged
    verbatim by the runner before parsing.
    """

    agent_id: str = "agent"
    capabilities: frozenset[str] = frozenset({"image", "video", "audio", "text"})

    def begin_episode(self, env: "Environment") -> None:
        """Called once before the first observation. Oracles use this to
        bind the environment they instrument; most agents ignore it."""

    def attach_seat(self, arena, pid: int, seed: int) -> None:
        """Tournament hook: called once per match before the first tick.
        Stateful agents reseed their per-match state here."""

    @abstractmethod
    def act(
        self,
        system_prompt: str,
        bundle: ObservationBundle,
        history: list[tuple[str, str]],
    ) -> str:
        ...


class ScriptedAgent(AgentConnector):
    """Replays a fixed list of replies, ignoring observations entirely.

    Used by determinism and intervention-purity tests: identical action
    streams regardless of what the agent is shown."""

    def __init__(self, replies: list[str], agent_id: str = "scripted", hold_last: bool = True):
        self.agent_id = agent_id
        self._replies = list(replies)
        self._hold_last = hold_last
        self._cursor = 0

    def begin_episode(self, env: "Environment") -> None:
        self._cursor = 0

    def attach_seat(self, arena, pid: int, seed: int) -> None:
        self._cursor = 0

    def act(self, system_prompt, bundle, history) -> str:
        if self._cursor < len(self._replies):
            reply = self._replies[self._cursor]
            self._cursor += 1
            return reply
        if self._hold_last and self._replies:
            return self._replies[-1]
        return ""


class FailingAgent(AgentConnector):
    """Raises a transport error after `ok_steps` successful replies."""

    def __init__(self, ok_steps: int = 0, reply: str = "", agent_id: str = "failing"):
        self.agent_id = agent_id
        self._ok_steps = ok_steps
        self._reply = reply
        self._count = 0

    def begin_episode(self, env: "Environment") -> None:
        self._count = 0

    def act(self, system_prompt, bundle, history) -> str:
        if self._count < self._ok_steps:
            self._count += 1
            return self._reply
        raise TransportError("simulated endpoint failure")


def truncate_history(history: list[tuple[str, str]], limit: Optional[int] = None) -> list[tuple[str, str]]:
    limit = HISTORY_WINDOW if limit is None else limit
    return history[-limit:] if limit > 0 else []
