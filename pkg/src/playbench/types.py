"""Core domain types shared across the platform.

These types fix the episode-log schema: field names here are the field
names on the wire (JSONL records) and in the asset store.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

import numpy as np

SCHEMA_VERSION = 1


class GameId(str, Enum):
    PATHFINDING = "pathfinding"
    ECHOES = "echoes"
    MELODY = "melody"
    PHANTOM = "phantom"
    SHOWDOWN = "showdown"


class Difficulty(str, Enum):
    EASY = "easy"
    MEDIUM = "medium"
    HARD = "hard"
    NONE = "none"  # showdown only (AI vs. AI, no graded difficulty)


class Outcome(str, Enum):
    GOAL_REACHED = "goal_reached"
    STEP_CAP_HIT = "step_cap_hit"
    ELIMINATED = "eliminated"
    ABORTED = "aborted"


# Difficulties each game accepts. Melody is evaluated at a single
# difficulty; showdown has none (multi-agent arena).
SUPPORTED_DIFFICULTIES: dict[GameId, tuple[Difficulty, ...]] = {
    GameId.PATHFINDING: (Difficulty.EASY, Difficulty.MEDIUM, Difficulty.HARD),
    GameId.ECHOES: (Difficulty.EASY, Difficulty.MEDIUM, Difficulty.HARD),
    GameId.MELODY: (Difficulty.MEDIUM,),
    GameId.PHANTOM: (Difficulty.EASY, Difficulty.MEDIUM, Difficulty.HARD),
    GameId.SHOWDOWN: (Difficulty.NONE,),
}

_ECHO_SEQUENCE_LENGTHS = {Difficulty.EASY: 6, Difficulty.MEDIUM: 9, Difficulty.HARD: 15}
_PHANTOM_ROUND_CAPS = {Difficulty.EASY: 20, Difficulty.MEDIUM: 25, Difficulty.HARD: 30}
MELODY_STEP_CAP = 160


def default_step_cap(game_id: GameId, difficulty: Difficulty) -> int:
    """Per-game default step caps (pathfinding/showdown capped at 500)."""
    if game_id is GameId.PATHFINDING or game_id is GameId.SHOWDOWN:
        return 500
    if game_id is GameId.MELODY:
        return MELODY_STEP_CAP
    if game_id is GameId.ECHOES:
        # One transcription step plus two slots per execution click.
        return 2 + 2 * _ECHO_SEQUENCE_LENGTHS[difficulty]
    if game_id is GameId.PHANTOM:
        return _PHANTOM_ROUND_CAPS[difficulty]
    raise ValueError(f"unknown game_id: {game_id}")


class DescriptorError(ValueError):
    """Invalid environment descriptor."""


@dataclass(frozen=True)
class EnvDescriptor:
    """Everything needed to reconstruct an initial world state.

    Identical descriptors produce byte-identical initial states: layout
    derives solely from the seed's "layout" substream.
    """

    game_id: GameId
    difficulty: Difficulty
    seed: int
    step_cap: int

    def __post_init__(self) -> None:
        if not isinstance(self.game_id, GameId):
            object.__setattr__(self, "game_id", GameId(self.game_id))
        if not isinstance(self.difficulty, Difficulty):
            object.__setattr__(self, "difficulty", Difficulty(self.difficulty))
        if not (0 <= int(self.seed) < 2**64):
            raise DescriptorError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.step_cap < 1:
            raise DescriptorError(f"step_cap must be >= 1, got {self.step_cap}")
        if self.difficulty not in SUPPORTED_DIFFICULTIES[self.game_id]:
            supported = ", ".join(d.value for d in SUPPORTED_DIFFICULTIES[self.game_id])
            raise DescriptorError(
                f"difficulty {self.difficulty.value!r} unsupported for {self.game_id.value}"
                f" (supported: {supported})"
            )

    @classmethod
    def create(
        cls,
        game_id: GameId | str,
        difficulty: Difficulty | str,
        seed: int,
        step_cap: Optional[int] = None,
    ) -> "EnvDescriptor":
        game_id = GameId(game_id)
        difficulty = Difficulty(difficulty)
        if step_cap is None:
            step_cap = default_step_cap(game_id, difficulty)
        return cls(game_id=game_id, difficulty=difficulty, seed=int(seed), step_cap=step_cap)

    def to_dict(self) -> dict[str, Any]:
        return {
            "game_id": self.game_id.value,
            "difficulty": self.difficulty.value,
            "seed": self.seed,
            "step_cap": self.step_cap,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "EnvDescriptor":
        return cls(
            game_id=GameId(d["game_id"]),
            difficulty=Difficulty(d["difficulty"]),
            seed=int(d["seed"]),
            step_cap=int(d["step_cap"]),
        )


class AudioKind(str, Enum):
    TRANSCRIPT = "transcript"
    TONES = "tones"
    CUES = "cues"


@dataclass
class AudioPayload:
    """One step's audio channel.

    Transcript audio carries its text verbatim (speech synthesis is a
    pluggable extension); tone/cue audio carries timed events that the
    renderer turns into a waveform.
    """

    kind: AudioKind
    transcript: Optional[str] = None
    tone_events: Optional[list[tuple[str, int, int]]] = None  # (note_id, onset_ms, duration_ms)
    cue_events: Optional[list[tuple[str, int]]] = None  # (cue_id, onset_ms)
    rendered: Optional[str] = None  # asset digest of the rendered waveform, if stored

    def __post_init__(self) -> None:
        if not isinstance(self.kind, AudioKind):
            self.kind = AudioKind(self.kind)
        if self.kind is AudioKind.TRANSCRIPT and not self.transcript:
            raise ValueError("transcript audio requires non-empty transcript text")
        if self.tone_events is not None:
            onsets = [onset for _, onset, _ in self.tone_events]
            if onsets != sorted(onsets):
                raise ValueError("tone onsets must be non-decreasing")
        if self.cue_events is not None:
            onsets = [onset for _, onset in self.cue_events]
            if onsets != sorted(onsets):
                raise ValueError("cue onsets must be non-decreasing")

    def canonical_bytes(self) -> bytes:
        body = {
            "kind": self.kind.value,
            "transcript": self.transcript,
            "tone_events": self.tone_events,
            "cue_events": self.cue_events,
        }
        return canonical_json(body).encode("utf-8")


@dataclass
class VideoPayload:
    """Ordered frame sequence with a frame rate."""

    frames: list[np.ndarray]
    fps: float

    def canonical_bytes(self) -> bytes:
        head = f"video:{len(self.frames)}:{self.fps!r}".encode("utf-8")
        parts = [head]
        for frame in self.frames:
            parts.append(frame_canonical_bytes(frame))
        return b"\x00".join(parts)


@dataclass
class ObservationBundle:
    """One timestep's multimodal output.

    A channel is absent (None) exactly when the active intervention ablates
    it; `text` is the assembled turn prompt (the system prompt is cached on
    the environment, not repeated per step).
    """

    text: Optional[str] = None
    frame: Optional[np.ndarray] = None
    video: Optional[VideoPayload] = None
    audio: Optional[AudioPayload] = None

    def __post_init__(self) -> None:
        if self.text is None and self.frame is None and self.video is None and self.audio is None:
            raise ValueError("observation must carry at least one channel")

    def channels(self) -> list[str]:
        present = []
        if self.frame is not None:
            present.append("image")
        if self.video is not None:
            present.append("video")
        if self.audio is not None:
            present.append("audio")
        if self.text is not None:
            present.append("text")
        return present

    def digests(self) -> dict[str, str]:
        """Per-channel content hashes over canonicalized bytes."""
        out: dict[str, str] = {}
        if self.frame is not None:
            out["image"] = sha256_hex(frame_canonical_bytes(self.frame))
        if self.video is not None:
            out["video"] = sha256_hex(self.video.canonical_bytes())
        if self.audio is not None:
            out["audio"] = sha256_hex(self.audio.canonical_bytes())
        if self.text is not None:
            out["text"] = sha256_hex(self.text.encode("utf-8"))
        return out


@dataclass
class ActionEnvelope:
    """Parsed agent action with the literal reply retained for audit.

    Invalid envelopes carry the game's no-op payload and never change
    world state.
    """

    game_id: GameId
    payload: dict[str, Any]
    raw_text: str
    valid: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "game_id": self.game_id.value,
            "payload": self.payload,
            "raw_text": self.raw_text,
            "valid": self.valid,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ActionEnvelope":
        return cls(
            game_id=GameId(d["game_id"]),
            payload=d["payload"],
            raw_text=d["raw_text"],
            valid=bool(d["valid"]),
        )


@dataclass
class StepRecord:
    step_index: int
    observation: dict[str, str]  # channel -> content digest
    action: ActionEnvelope
    transition_note: str
    state_digest: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "step_index": self.step_index,
            "observation": self.observation,
            "action": self.action.to_dict(),
            "transition_note": self.transition_note,
            "state_digest": self.state_digest,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "StepRecord":
        return cls(
            step_index=int(d["step_index"]),
            observation=dict(d["observation"]),
            action=ActionEnvelope.from_dict(d["action"]),
            transition_note=d["transition_note"],
            state_digest=d["state_digest"],
        )


@dataclass
class EpisodeRecord:
    """Full trajectory of one episode; self-sufficient for replay.

    `wall_clock_s` is measurement metadata and is excluded from the record
    digest so that two runs of the same episode digest identically.
    """

    descriptor: EnvDescriptor
    agent_id: str
    steps: list[StepRecord] = field(default_factory=list)
    intervention: Optional[dict[str, Any]] = None
    outcome: Outcome = Outcome.STEP_CAP_HIT
    raw_metrics: dict[str, Any] = field(default_factory=dict)
    wall_clock_s: float = 0.0
    mode: str = "recorded"  # "recorded" | "warmup" (human sessions)
    error_note: Optional[str] = None
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": self.schema_version,
            "descriptor": self.descriptor.to_dict(),
            "intervention": self.intervention,
            "agent_id": self.agent_id,
            "steps": [s.to_dict() for s in self.steps],
            "outcome": self.outcome.value,
            "raw_metrics": self.raw_metrics,
            "wall_clock_s": self.wall_clock_s,
            "mode": self.mode,
            "error_note": self.error_note,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "EpisodeRecord":
        if int(d.get("schema_version", -1)) != SCHEMA_VERSION:
            raise SchemaError(
                f"episode schema version {d.get('schema_version')} != {SCHEMA_VERSION}"
            )
        return cls(
            descriptor=EnvDescriptor.from_dict(d["descriptor"]),
            intervention=d.get("intervention"),
            agent_id=d["agent_id"],
            steps=[StepRecord.from_dict(s) for s in d.get("steps", [])],
            outcome=Outcome(d["outcome"]),
            raw_metrics=dict(d.get("raw_metrics", {})),
            wall_clock_s=float(d.get("wall_clock_s", 0.0)),
            mode=d.get("mode", "recorded"),
            error_note=d.get("error_note"),
            schema_version=SCHEMA_VERSION,
        )

    def digest(self) -> str:
        body = self.to_dict()
        body.pop("wall_clock_s")
        return sha256_hex(canonical_json(body).encode("utf-8"))


class SchemaError(ValueError):
    """Episode record produced by an incompatible schema version."""


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def frame_canonical_bytes(frame: np.ndarray) -> bytes:
    """Canonical bytes of a raster frame: dims header + raw RGB."""
    if frame.dtype != np.uint8 or frame.ndim != 3 or frame.shape[2] != 3:
        raise ValueError(f"frame must be HxWx3 uint8, got {frame.dtype} {frame.shape}")
    h, w = frame.shape[:2]
    return f"frame:{w}x{h}:".encode("utf-8") + frame.tobytes()
