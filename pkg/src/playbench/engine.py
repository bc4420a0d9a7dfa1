"""Environment contract, seeded episode loop, and trajectory replay.

An Environment owns one episode's world state: layout is derived solely
from the descriptor seed's "layout" substream, transitions are
deterministic functions of actions, and invalid actions never touch state.
The runner closes the loop (observe -> intervene -> query agent -> parse ->
transition) and produces a self-sufficient EpisodeRecord; `replay`
re-simulates a record from its seed and recorded actions and checks every
observation and state digest.
"""

from __future__ import annotations

import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Callable, Optional

from .types import (
    SCHEMA_VERSION,
    ActionEnvelope,
    EnvDescriptor,
    EpisodeRecord,
    ObservationBundle,
    Outcome,
    SchemaError,
    StepRecord,
)

if TYPE_CHECKING:
    from .agents.base import AgentConnector
    from .interventions import InterventionConfig


class Environment(ABC):
    """One game episode behind the common turn-based contract."""

    def __init__(self, descriptor: EnvDescriptor):
        self.descriptor = descriptor
        self.intervention: Optional["InterventionConfig"] = None

    @property
    def game_id(self):
        return self.descriptor.game_id

    def configure_intervention(self, intervention: Optional["InterventionConfig"]) -> None:
        """Record the active intervention. Only the echoes Simplified variant
        changes anything structural (it drops the execution phase)."""
        self.intervention = intervention

    @abstractmethod
    def reset(self) -> None:
        """(Re)build the initial world state from the descriptor seed."""

    @abstractmethod
    def system_prompt(self) -> str:
        ...

    @abstractmethod
    def observe(self) -> ObservationBundle:
        """Render the current observation. Pure: never mutates state."""

    @abstractmethod
    def parse_action(self, raw_text: str) -> ActionEnvelope:
        """Parse an agent reply. Unparseable replies yield an invalid
        envelope carrying the game's no-op payload."""

    @abstractmethod
    def apply(self, envelope: ActionEnvelope) -> str:
        """Advance the world by one action; returns a transition note.
        Invalid envelopes must leave state untouched."""

    @abstractmethod
    def episode_over(self) -> Optional[Outcome]:
        """Terminal outcome if the episode has ended on its own terms
        (goal reached / eliminated), else None. Step caps are the
        runner's concern."""

    @abstractmethod
    def raw_metrics(self) -> dict[str, Any]:
        ...

    @abstractmethod
    def state_digest(self) -> str:
        """Content hash of the canonicalized dynamic world state."""

    @abstractmethod
    def legal_action_schema(self) -> dict[str, Any]:
        """Machine-readable description of the accepted action grammar
        (consumed by the session service and its UI)."""


class UnknownGameError(ValueError):
    pass


def create_env(descriptor: EnvDescriptor) -> Environment:
    """Instantiate the environment for a descriptor, already reset.

    Raises DescriptorError for unsupported difficulty (checked by the
    descriptor itself) and UnknownGameError for an unknown game id.
    """
    from . import envs

    env = envs.make_env(descriptor)
    env.reset()
    return env


# Transform signature applied to each observation before the agent sees it.
ObservationTransform = Callable[[ObservationBundle, Environment], ObservationBundle]


@dataclass
class ReplayResult:
    match: bool
    divergence_step: Optional[int] = None
    note: str = ""


class EpisodeRunner:
    """Stepwise episode driver shared by the batch loop and the session
    service. One runner = one episode."""

    def __init__(
        self,
        env: Environment,
        agent_id: str,
        intervention: Optional["InterventionConfig"] = None,
        asset_sink: Optional[Callable[[ObservationBundle, dict[str, str]], None]] = None,
        mode: str = "recorded",
    ):
        from .interventions import get_transform, validate_applicability

        if intervention is not None:
            validate_applicability(intervention, env.game_id)
        env.configure_intervention(intervention)
        env.reset()
        self.env = env
        self.agent_id = agent_id
        self.intervention = intervention
        self._transform: Optional[ObservationTransform] = (
            get_transform(intervention) if intervention is not None else None
        )
        self._asset_sink = asset_sink
        self._steps: list[StepRecord] = []
        self._history: list[tuple[str, str]] = []
        self._outcome: Optional[Outcome] = None
        self._error_note: Optional[str] = None
        self._started = time.monotonic()
        self._mode = mode
        self._pending: Optional[tuple[ObservationBundle, dict[str, str]]] = None

    @property
    def steps_taken(self) -> int:
        return len(self._steps)

    @property
    def done(self) -> bool:
        return self._outcome is not None

    @property
    def outcome(self) -> Optional[Outcome]:
        return self._outcome

    def current_observation(self) -> ObservationBundle:
        """Observation for the pending step (intervention applied), cached
        so repeated fetches are idempotent."""
        if self.done:
            raise RuntimeError("episode is over")
        if self._pending is None:
            bundle = self.env.observe()
            if self._transform is not None:
                bundle = self._transform(bundle, self.env)
            digests = bundle.digests()
            if self._asset_sink is not None:
                self._asset_sink(bundle, digests)
            self._pending = (bundle, digests)
        return self._pending[0]

    def submit_reply(self, raw_text: str) -> tuple[ActionEnvelope, str]:
        """Parse and apply one agent reply against the pending observation."""
        if self.done:
            raise RuntimeError("episode is over")
        bundle = self.current_observation()
        digests = self._pending[1]
        envelope = self.env.parse_action(raw_text)
        note = self.env.apply(envelope)
        self._history.append((bundle.text or "", raw_text))
        self._steps.append(
            StepRecord(
                step_index=len(self._steps),
                observation=digests,
                action=envelope,
                transition_note=note,
                state_digest=self.env.state_digest(),
            )
        )
        self._pending = None
        over = self.env.episode_over()
        if over is not None:
            self._outcome = over
        elif len(self._steps) >= self.env.descriptor.step_cap:
            self._outcome = Outcome.STEP_CAP_HIT
        return envelope, note

    def abort(self, note: str) -> None:
        self._outcome = Outcome.ABORTED
        self._error_note = note

    def history_window(self, limit: int) -> list[tuple[str, str]]:
        return self._history[-limit:] if limit > 0 else []

    def finalize(self) -> EpisodeRecord:
        if not self.done:
            raise RuntimeError("episode still running")
        metrics = dict(self.env.raw_metrics())
        metrics.setdefault("steps", len(self._steps))
        metrics["invalid_actions"] = sum(1 for s in self._steps if not s.action.valid)
        intervention_dict = self.intervention.to_dict() if self.intervention else None
        return EpisodeRecord(
            descriptor=self.env.descriptor,
            intervention=intervention_dict,
            agent_id=self.agent_id,
            steps=self._steps,
            outcome=self._outcome,
            raw_metrics=metrics,
            wall_clock_s=time.monotonic() - self._started,
            mode=self._mode,
            error_note=self._error_note,
        )


def run_episode(
    env: Environment,
    agent: "AgentConnector",
    intervention: Optional["InterventionConfig"] = None,
    asset_sink: Optional[Callable[[ObservationBundle, dict[str, str]], None]] = None,
) -> EpisodeRecord:
    """Run one full episode of `agent` in `env`.

    Transport failures from the agent (after its own bounded retries)
    abort the episode; aborted records are excluded from metric means.
    """
    from .agents.base import HISTORY_WINDOW, TransportError

    runner = EpisodeRunner(env, agent.agent_id, intervention, asset_sink)
    agent.begin_episode(env)
    while not runner.done:
        bundle = runner.current_observation()
        try:
            reply = agent.act(env.system_prompt(), bundle, runner.history_window(HISTORY_WINDOW))
        except TransportError as exc:
            runner.abort(f"transport failure: {exc}")
            break
        runner.submit_reply(reply)
    return runner.finalize()


def replay(record: EpisodeRecord) -> ReplayResult:
    """Re-simulate a record from its seed and recorded actions.

    match=True iff every recomputed observation digest, re-parsed action,
    and state digest equals the recorded one and the outcome agrees.
    """
    from .interventions import InterventionConfig, get_transform

    if record.schema_version != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema version {record.schema_version}")

    env = create_env(record.descriptor)
    intervention = (
        InterventionConfig.from_dict(record.intervention) if record.intervention else None
    )
    if intervention is not None:
        env.configure_intervention(intervention)
        env.reset()
    transform = get_transform(intervention) if intervention is not None else None

    for step in record.steps:
        bundle = env.observe()
        if transform is not None:
            bundle = transform(bundle, env)
        digests = bundle.digests()
        if digests != step.observation:
            return ReplayResult(False, step.step_index, "observation digest mismatch")
        envelope = env.parse_action(step.action.raw_text)
        if envelope.to_dict() != step.action.to_dict():
            return ReplayResult(False, step.step_index, "action envelope mismatch")
        env.apply(envelope)
        if env.state_digest() != step.state_digest:
            return ReplayResult(False, step.step_index, "state digest mismatch")

    if record.outcome in (Outcome.GOAL_REACHED, Outcome.ELIMINATED):
        if env.episode_over() != record.outcome:
            return ReplayResult(False, None, "terminal outcome mismatch")
    elif record.outcome is Outcome.STEP_CAP_HIT:
        if env.episode_over() is not None or len(record.steps) < record.descriptor.step_cap:
            return ReplayResult(False, None, "step-cap outcome mismatch")
    return ReplayResult(True)
