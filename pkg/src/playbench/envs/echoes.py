"""Two-phase sequence transcription and execution on an icon grid.

Phase 1 streams the highlight sequence as video plus aligned tones; the
agent replies once with its transcription. The transcription step is
one-shot: an unparseable reply is recorded as a parse failure (scoring 0
on both parsing accuracies) and the execution phase still begins, which
is why parse-failure rates and execution scores coexist in reports.
Phase 2 shows the static grid and the ground-truth sequence as text; the
agent clicks cells one per turn, and the phase ends at the first wrong
click. The Simplified intervention drops phase 2 entirely.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Optional

from .. import rng as rngmod
from ..engine import Environment
from ..render import frames
from ..render.prompts import (
    ECHOES_PHASE1_TEMPLATE,
    ECHOES_PHASE2_TEMPLATE,
    ECHOES_SIMPLIFIED_TEMPLATE,
    assemble_prompt,
)
from ..types import (
    ActionEnvelope,
    AudioKind,
    AudioPayload,
    Difficulty,
    GameId,
    ObservationBundle,
    Outcome,
    VideoPayload,
    canonical_json,
    sha256_hex,
)

GRID_DIMS = {Difficulty.EASY: (3, 3), Difficulty.MEDIUM: (4, 4), Difficulty.HARD: (4, 4)}
SEQUENCE_LENGTHS = {Difficulty.EASY: 6, Difficulty.MEDIUM: 9, Difficulty.HARD: 15}
HIGHLIGHT_MS = 600
STREAM_FPS = 5
NOTE_PALETTE = ("C4", "C#4", "D4", "D#4", "E4", "F4", "F#4", "G4", "G#4", "A4", "A#4", "B4")


@dataclass
class IconGrid:
    rows: int
    cols: int
    icons: list[list[str]]  # distinct icon ids, one per cell

    def icon_at(self, coord: tuple[int, int]) -> str:
        return self.icons[coord[0]][coord[1]]


@dataclass
class EchoSequence:
    items: list[tuple[tuple[int, int], str, str]]  # (grid_coord, icon_id, note_id)

    def __len__(self) -> int:
        return len(self.items)


@dataclass
class EchoParseResult:
    transcribed: list[tuple[tuple[int, int], str]] = field(default_factory=list)
    parse_failed: bool = False


def generate_echo_sequence(seed: int, difficulty: Difficulty) -> tuple[IconGrid, EchoSequence]:
    """Seeded grid + highlight sequence (no immediate coordinate repeats)."""
    rows, cols = GRID_DIMS[difficulty]
    length = SEQUENCE_LENGTHS[difficulty]
    gen = rngmod.substream(seed, rngmod.LAYOUT)

    chosen = gen.permutation(len(frames.ICON_GLYPHS))[: rows * cols]
    icons = [
        [frames.ICON_GLYPHS[int(chosen[r * cols + c])] for c in range(cols)]
        for r in range(rows)
    ]
    grid = IconGrid(rows=rows, cols=cols, icons=icons)

    items: list[tuple[tuple[int, int], str, str]] = []
    prev: Optional[tuple[int, int]] = None
    while len(items) < length:
        coord = (int(gen.integers(rows)), int(gen.integers(cols)))
        if coord == prev:
            continue
        note = NOTE_PALETTE[int(gen.integers(len(NOTE_PALETTE)))]
        items.append((coord, grid.icon_at(coord), note))
        prev = coord
    return grid, EchoSequence(items=items)


def render_phase1_stream(grid: IconGrid, sequence: EchoSequence) -> tuple[VideoPayload, AudioPayload]:
    """Highlight video at 5 fps (600 ms per item) plus aligned tone events."""
    frame_list = []
    per_item = HIGHLIGHT_MS * STREAM_FPS // 1000
    for coord, _, _ in sequence.items:
        cell_frame = frames.render_icon_grid(grid.rows, grid.cols, grid.icons, highlight=coord)
        frame_list.extend([cell_frame] * per_item)
    tones = [
        (note, i * HIGHLIGHT_MS, HIGHLIGHT_MS)
        for i, (_, _, note) in enumerate(sequence.items)
    ]
    return (
        VideoPayload(frames=frame_list, fps=float(STREAM_FPS)),
        AudioPayload(kind=AudioKind.TONES, tone_events=tones),
    )


def score_parse(result: EchoParseResult, truth: EchoSequence) -> tuple[int, int, bool]:
    """Positional coordinate/icon accuracies; failures score (0, 0, True)."""
    if result.parse_failed:
        return 0, 0, True
    coord_acc = 0
    icon_acc = 0
    for i, (coord, icon, _) in enumerate(truth.items):
        if i >= len(result.transcribed):
            break
        got_coord, got_icon = result.transcribed[i]
        if got_coord == coord:
            coord_acc += 1
        if got_icon == icon:
            icon_acc += 1
    return coord_acc, icon_acc, False


def simplified_task_score(result: EchoParseResult, truth: EchoSequence) -> float:
    """Perception-only final score: equal-weight coord/icon accuracy."""
    coord_acc, icon_acc, _ = score_parse(result, truth)
    return 0.5 * coord_acc + 0.5 * icon_acc


_SEQ_ITEM_RE = re.compile(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)\s*[=:]\s*([a-z_]+)", re.IGNORECASE)
_CLICK_RE = re.compile(r"click\s*:\s*\(\s*(\d+)\s*,\s*(\d+)\s*\)", re.IGNORECASE)


def parse_transcription(raw_text: str) -> EchoParseResult:
    items = _SEQ_ITEM_RE.findall(raw_text or "")
    if not items:
        return EchoParseResult(parse_failed=True)
    return EchoParseResult(
        transcribed=[((int(r), int(c)), icon.lower()) for r, c, icon in items]
    )


class EchoesEnv(Environment):
    def reset(self) -> None:
        self.grid, self.sequence = generate_echo_sequence(
            self.descriptor.seed, self.descriptor.difficulty
        )
        self.phase = 1
        self.cursor = 0  # next expected index in the execution phase
        self.execution_ended = False
        self.parse_result: Optional[EchoParseResult] = None
        self.last_result = "none"
        self.last_cue: Optional[AudioPayload] = None

    @property
    def simplified(self) -> bool:
        return self.intervention is not None and self.intervention.kind == "simplified"

    def system_prompt(self) -> str:
        template = ECHOES_SIMPLIFIED_TEMPLATE if self.simplified else ECHOES_PHASE1_TEMPLATE
        return template.system_text

    def _sequence_text(self) -> str:
        return "; ".join(
            f"({r},{c})={icon}" for (r, c), icon, _ in self.sequence.items
        )

    def observe(self) -> ObservationBundle:
        fields = {
            "channel_inventory": "video, audio, text" if self.phase == 1 else "image, audio, text",
            "rows": str(self.grid.rows),
            "cols": str(self.grid.cols),
            "sequence_length": str(len(self.sequence)),
        }
        if self.phase == 1:
            video, audio = render_phase1_stream(self.grid, self.sequence)
            template = ECHOES_SIMPLIFIED_TEMPLATE if self.simplified else ECHOES_PHASE1_TEMPLATE
            text = assemble_prompt(template.turn_skeleton, fields)
            return ObservationBundle(text=text, video=video, audio=audio)
        frame = frames.render_icon_grid(self.grid.rows, self.grid.cols, self.grid.icons)
        fields["sequence_text"] = self._sequence_text()
        fields["last_result"] = self.last_result
        fields["hint_block"] = ""
        text = assemble_prompt(ECHOES_PHASE2_TEMPLATE.turn_skeleton, fields)
        return ObservationBundle(text=text, frame=frame, audio=self.last_cue)

    def parse_action(self, raw_text: str) -> ActionEnvelope:
        if self.phase == 1:
            result = parse_transcription(raw_text)
            return ActionEnvelope(
                game_id=GameId.ECHOES,
                payload={
                    "kind": "transcription",
                    "items": [[list(coord), icon] for coord, icon in result.transcribed],
                    "parse_failed": result.parse_failed,
                },
                raw_text=raw_text,
                valid=not result.parse_failed,
            )
        clicks = _CLICK_RE.findall(raw_text or "")
        if clicks:
            r, c = (int(v) for v in clicks[-1])
            if 0 <= r < self.grid.rows and 0 <= c < self.grid.cols:
                return ActionEnvelope(
                    game_id=GameId.ECHOES,
                    payload={"kind": "click", "coord": [r, c]},
                    raw_text=raw_text,
                    valid=True,
                )
        return ActionEnvelope(
            game_id=GameId.ECHOES,
            payload={"kind": "click", "coord": None},
            raw_text=raw_text,
            valid=False,
        )

    def apply(self, envelope: ActionEnvelope) -> str:
        if self.phase == 1:
            result = EchoParseResult(
                transcribed=[((r, c), icon) for (r, c), icon in
                             ((tuple(coord), icon) for coord, icon in envelope.payload["items"])],
                parse_failed=envelope.payload["parse_failed"],
            )
            self.parse_result = result
            if self.simplified:
                self.execution_ended = True
                return "transcription recorded; perception-only episode complete"
            self.phase = 2
            return "transcription recorded; execution phase begins"
        if not envelope.valid:
            return "invalid click: no-op"
        coord = tuple(envelope.payload["coord"])
        expected, _, note = self.sequence.items[self.cursor]
        if coord == expected:
            self.cursor += 1
            self.last_result = f"correct ({self.cursor}/{len(self.sequence)})"
            self.last_cue = AudioPayload(kind=AudioKind.TONES, tone_events=[(note, 0, HIGHLIGHT_MS)])
            if self.cursor == len(self.sequence):
                self.execution_ended = True
                return "correct click; sequence complete"
            return "correct click"
        self.execution_ended = True
        self.last_result = "wrong"
        self.last_cue = AudioPayload(kind=AudioKind.CUES, cue_events=[("click_wrong", 0)])
        return "wrong click; execution phase over"

    def episode_over(self) -> Optional[Outcome]:
        if not self.execution_ended:
            return None
        if self.simplified:
            ok = self.parse_result is not None and not self.parse_result.parse_failed
            return Outcome.GOAL_REACHED if ok else Outcome.ELIMINATED
        if self.cursor == len(self.sequence):
            return Outcome.GOAL_REACHED
        return Outcome.ELIMINATED

    def raw_metrics(self) -> dict[str, Any]:
        result = self.parse_result or EchoParseResult(parse_failed=True)
        coord_acc, icon_acc, failed = score_parse(result, self.sequence)
        metrics: dict[str, Any] = {
            "sequence_length": len(self.sequence),
            "coord_acc": coord_acc,
            "icon_acc": icon_acc,
            "parse_failed": failed,
            "execution_score": self.cursor,
            "success": (not self.simplified) and self.cursor == len(self.sequence),
        }
        if self.simplified:
            metrics["simplified_score"] = simplified_task_score(result, self.sequence)
        return metrics

    def state_digest(self) -> str:
        # World state: layout, truth sequence, execution progress, and the
        # recorded transcription. The phase flag is flow bookkeeping (the
        # Simplified variant legitimately changes it) and stays out.
        body = {
            "icons": self.grid.icons,
            "sequence": [[list(c), icon, note] for c, icon, note in self.sequence.items],
            "cursor": self.cursor,
            "parse": None
            if self.parse_result is None
            else [[list(c), icon] for c, icon in self.parse_result.transcribed],
        }
        return sha256_hex(canonical_json(body).encode("utf-8"))

    def legal_action_schema(self) -> dict[str, Any]:
        if self.phase == 1:
            return {
                "kind": "transcription",
                "form": "SEQUENCE: (row,col)=<icon>; ...",
                "rows": self.grid.rows,
                "cols": self.grid.cols,
                "icons": sorted({i for row in self.grid.icons for i in row}),
                "length": len(self.sequence),
            }
        return {
            "kind": "click_grid",
            "form": "CLICK: (row,col)",
            "rows": self.grid.rows,
            "cols": self.grid.cols,
        }
