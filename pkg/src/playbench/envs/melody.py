"""Latent color-to-note mapping discovery against a target scale.

Seven colored blocks each play one note of a seeded 7-note bijection.
The agent must play the ascending major scale; a wrong note resets scale
progress to the start (streaks are therefore meaningful). The composite
score blends hit rate, step efficiency, streak quality, error penalties,
and exploration into a 0-100 value.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Optional

from .. import rng as rngmod
from ..engine import Environment
from ..render import frames
from ..render.prompts import MELODY_TEMPLATE, assemble_prompt
from ..types import (
    ActionEnvelope,
    AudioKind,
    AudioPayload,
    GameId,
    ObservationBundle,
    Outcome,
    canonical_json,
    sha256_hex,
)

COLORS = ("red", "orange", "yellow", "green", "blue", "indigo", "violet")
TARGET_SCALE = ("C4", "D4", "E4", "F4", "G4", "A4", "B4")
NOTE_MS = 400

# Step budget an informed player needs: one probe per color plus one
# clean run of the scale.
REQUIRED_STEPS = len(COLORS) + len(TARGET_SCALE)


@dataclass
class ColorNoteMapping:
    pairs: dict[str, str]  # color -> note, bijective

    @classmethod
    def generate(cls, seed: int) -> "ColorNoteMapping":
        gen = rngmod.substream(seed, rngmod.LAYOUT)
        order = gen.permutation(len(TARGET_SCALE))
        return cls(pairs={c: TARGET_SCALE[int(i)] for c, i in zip(COLORS, order)})

    def note_for(self, color: str) -> str:
        return self.pairs[color]


@dataclass
class MelodyStats:
    total_steps: int = 0
    hits: int = 0
    required_steps: int = REQUIRED_STEPS
    correct_streak_total: int = 0
    error_streak_total: int = 0
    same_color_error_total: int = 0
    color_changes: int = 0
    completed: bool = False
    # bookkeeping for the same-color-error runs
    _run_color: Optional[str] = field(default=None, repr=False)
    _run_len: int = field(default=0, repr=False)
    _last_color: Optional[str] = field(default=None, repr=False)

    def record(self, color: str, hit: bool) -> None:
        self.total_steps += 1
        if self._last_color is not None and color != self._last_color:
            self.color_changes += 1
        self._last_color = color
        if hit:
            self.hits += 1
            self.correct_streak_total += 1
            self._run_color, self._run_len = None, 0
        else:
            self.error_streak_total += 1
            if color == self._run_color:
                self._run_len += 1
                # A repeated run counts every click in it, so the second
                # click retroactively adds the first.
                self.same_color_error_total += 2 if self._run_len == 2 else 1
            else:
                self._run_color, self._run_len = color, 1


def composite_score(stats: MelodyStats) -> float:
    """Sum of the six scoring components, clamped to [0, 100].

    A: hit rate x 30.
    B: 30 when the run used no more than the informed-player budget, else
       decays as 30 x required/total.
    C: total correct-streak length over steps x 10.
    D: 10 minus error-streak share x 10.
    E: 15 minus repeated-same-wrong-color share x 15.
    F: exploration, color changes over (steps - 1) x 5 (5 for a 1-step run).
    """
    n = stats.total_steps
    if n < 1:
        raise ValueError("composite score requires at least one step")
    a = (stats.hits / n) * 30.0
    b = 30.0 if n <= stats.required_steps else 30.0 * (stats.required_steps / n)
    c = (stats.correct_streak_total / n) * 10.0
    d = 10.0 - (stats.error_streak_total / n) * 10.0
    e = 15.0 - (stats.same_color_error_total / n) * 15.0
    f = 5.0 if n == 1 else (stats.color_changes / (n - 1)) * 5.0
    return min(100.0, max(0.0, a + b + c + d + e + f))


_CLICK_RE = re.compile(r"click\s*:\s*([a-z]+)", re.IGNORECASE)


class MelodyEnv(Environment):
    def reset(self) -> None:
        self.mapping = ColorNoteMapping.generate(self.descriptor.seed)
        self.stats = MelodyStats()
        self.cursor = 0
        self.revealed: dict[str, str] = {}  # colors heard so far -> note
        self.last_color: Optional[str] = None
        self.last_note: Optional[str] = None
        self.last_result = "none"

    def system_prompt(self) -> str:
        return MELODY_TEMPLATE.system_text.format(colors=", ".join(COLORS))

    def _state_description(self) -> str:
        lines = [
            f"LAST_CLICK: {self.last_color or 'none'}",
            f"LAST_NOTE: {self.last_note or 'none'}",
            f"LAST_RESULT: {self.last_result}",
            f"SCALE_PROGRESS: {self.cursor}/{len(TARGET_SCALE)}",
            f"TOTAL_CLICKS: {self.stats.total_steps}",
            "HINTS:",
            f"  notes_confirmed: {len(self.revealed)}/{len(COLORS)}",
            f"  colors_untested: {', '.join(c for c in COLORS if c not in self.revealed) or 'none'}",
            f"  next_required_note: {TARGET_SCALE[self.cursor] if self.cursor < len(TARGET_SCALE) else 'done'}",
        ]
        return "\n".join(lines)

    def observe(self) -> ObservationBundle:
        frame = frames.render_melody_blocks(COLORS, self.cursor, len(TARGET_SCALE))
        audio = None
        if self.last_note is not None:
            audio = AudioPayload(
                kind=AudioKind.TONES, tone_events=[(self.last_note, 0, NOTE_MS)]
            )
        text = assemble_prompt(
            MELODY_TEMPLATE.turn_skeleton,
            {
                "channel_inventory": "image, audio, text" if audio else "image, text",
                "state_description": self._state_description(),
                "hint_block": "",
            },
        )
        return ObservationBundle(text=text, frame=frame, audio=audio)

    def parse_action(self, raw_text: str) -> ActionEnvelope:
        found = _CLICK_RE.findall(raw_text or "")
        for token in reversed(found):
            color = token.lower()
            if color in COLORS:
                return ActionEnvelope(
                    game_id=GameId.MELODY,
                    payload={"color": color},
                    raw_text=raw_text,
                    valid=True,
                )
        return ActionEnvelope(
            game_id=GameId.MELODY, payload={"color": None}, raw_text=raw_text, valid=False
        )

    def apply(self, envelope: ActionEnvelope) -> str:
        if not envelope.valid:
            return "invalid click: no-op"
        color = envelope.payload["color"]
        note = self.mapping.note_for(color)
        hit = note == TARGET_SCALE[self.cursor]
        self.stats.record(color, hit)
        self.revealed[color] = note
        self.last_color, self.last_note = color, note
        if hit:
            self.cursor += 1
            self.last_result = "correct"
            if self.cursor == len(TARGET_SCALE):
                self.stats.completed = True
                return f"{color} played {note}: correct; scale complete"
            return f"{color} played {note}: correct"
        self.cursor = 0
        self.last_result = "wrong (progress reset)"
        return f"{color} played {note}: wrong; progress reset"

    def episode_over(self) -> Optional[Outcome]:
        return Outcome.GOAL_REACHED if self.stats.completed else None

    def raw_metrics(self) -> dict[str, Any]:
        metrics: dict[str, Any] = {
            "completed": self.stats.completed,
            "total_steps": self.stats.total_steps,
            "hits": self.stats.hits,
            "color_changes": self.stats.color_changes,
        }
        if self.stats.total_steps >= 1:
            metrics["composite_score"] = composite_score(self.stats)
        return metrics

    def state_digest(self) -> str:
        body = {
            "mapping": self.mapping.pairs,
            "cursor": self.cursor,
            "stats": [
                self.stats.total_steps,
                self.stats.hits,
                self.stats.correct_streak_total,
                self.stats.error_streak_total,
                self.stats.same_color_error_total,
                self.stats.color_changes,
                self.stats.completed,
            ],
            "revealed": self.revealed,
        }
        return sha256_hex(canonical_json(body).encode("utf-8"))

    def legal_action_schema(self) -> dict[str, Any]:
        return {"kind": "click_color", "form": "CLICK: <color>", "colors": list(COLORS)}
