"""Prompt templates and assembly.

Each game ships a versioned system prompt (sent once per episode) and a
turn-prompt skeleton with named placeholders. Assembly is placeholder
substitution only; no game logic lives here.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..types import GameId

TEMPLATE_VERSION = "v1"


class MissingPlaceholderError(KeyError):
    pass


@dataclass(frozen=True)
class PromptTemplate:
    game_id: GameId
    system_text: str
    turn_skeleton: str
    version: str = TEMPLATE_VERSION


_PLACEHOLDER_RE = re.compile(r"\{([a-z_]+)\}")


def assemble_prompt(skeleton: str, fields: dict[str, str]) -> str:
    """Fill every placeholder in `skeleton`; unknown placeholders raise."""
    def sub(match: re.Match) -> str:
        key = match.group(1)
        if key not in fields:
            raise MissingPlaceholderError(f"no value for placeholder {{{key}}}")
        return str(fields[key])

    return _PLACEHOLDER_RE.sub(sub, skeleton)


# A turn prompt reduced to the bare action request, used when the text
# channel is ablated.
MINIMAL_TURN_PROMPT = "Reply with your next action line now."


PATHFINDING_TEMPLATE = PromptTemplate(
    game_id=GameId.PATHFINDING,
    system_text=(
        "You are navigating a first-person maze toward a hidden stationary target.\n"
        "Each turn you may rotate and then move forward. Walls block movement.\n"
        "Reply with exactly one action line in this form:\n"
        "ACTION: rotate=<degrees in [-180,180]> move=<units in [0,1]>\n"
        "Positive rotation turns clockwise (to your right). Examples:\n"
        "ACTION: rotate=90 move=1\n"
        "ACTION: rotate=0 move=0.5"
    ),
    turn_skeleton=(
        "AVAILABLE INPUTS: {channel_inventory}\n"
        "{state_description}\n"
        "The audio channel carries spoken guidance toward the target.\n"
        "Decide your next action. Reply with one ACTION line."
    ),
)

ECHOES_PHASE1_TEMPLATE = PromptTemplate(
    game_id=GameId.ECHOES,
    system_text=(
        "You are playing a two-phase sequence game on a grid of icons.\n"
        "Phase 1 shows a video of grid cells lighting up in order, each with a\n"
        "unique sound. Transcribe the highlighted sequence in order as:\n"
        "SEQUENCE: (row,col)=<icon>; (row,col)=<icon>; ...\n"
        "Rows and columns are 0-based. Phase 2 will ask you to click the cells\n"
        "in order, one per turn, as: CLICK: (row,col)"
    ),
    turn_skeleton=(
        "AVAILABLE INPUTS: {channel_inventory}\n"
        "PHASE: 1 (transcription)\n"
        "GRID: {rows} rows x {cols} cols\n"
        "SEQUENCE_LENGTH: {sequence_length}\n"
        "Watch the video and listen to the tones, then reply with one SEQUENCE line."
    ),
)

ECHOES_PHASE2_TEMPLATE = PromptTemplate(
    game_id=GameId.ECHOES,
    system_text=ECHOES_PHASE1_TEMPLATE.system_text,
    turn_skeleton=(
        "AVAILABLE INPUTS: {channel_inventory}\n"
        "PHASE: 2 (execution)\n"
        "GRID: {rows} rows x {cols} cols\n"
        "GROUND_TRUTH_SEQUENCE: {sequence_text}\n"
        "LAST_CLICK_RESULT: {last_result}\n"
        "{hint_block}"
        "Click the next cell of the sequence. Reply with one CLICK line."
    ),
)

ECHOES_SIMPLIFIED_TEMPLATE = PromptTemplate(
    game_id=GameId.ECHOES,
    system_text=(
        "You are playing a perception game on a grid of icons. A video shows\n"
        "grid cells lighting up in order, each with a unique sound. Output the\n"
        "symbolic sequence you perceived, in order, as:\n"
        "SEQUENCE: (row,col)=<icon>; (row,col)=<icon>; ...\n"
        "Rows and columns are 0-based."
    ),
    turn_skeleton=(
        "AVAILABLE INPUTS: {channel_inventory}\n"
        "PHASE: 1 (transcription only)\n"
        "GRID: {rows} rows x {cols} cols\n"
        "SEQUENCE_LENGTH: {sequence_length}\n"
        "Watch the video and listen to the tones, then reply with one SEQUENCE line."
    ),
)

MELODY_TEMPLATE = PromptTemplate(
    game_id=GameId.MELODY,
    system_text=(
        "You are playing a musical deduction game. Colored blocks each play a\n"
        "hidden musical note; the color-to-note mapping is fixed for this episode\n"
        "but unknown to you. Reproduce the ascending target scale by clicking\n"
        "blocks in the right order. A wrong note resets your progress to the\n"
        "start of the scale. Reply with exactly one line:\n"
        "CLICK: <color>\n"
        "Colors: {colors}."
    ),
    turn_skeleton=(
        "AVAILABLE INPUTS: {channel_inventory}\n"
        "{state_description}\n"
        "{hint_block}"
        "Pick the next block. Reply with one CLICK line."
    ),
)

PHANTOM_TEMPLATE = PromptTemplate(
    game_id=GameId.PHANTOM,
    system_text=(
        "You are the commander of a small squad on a fogged tactical map.\n"
        "Complete all objectives before the round limit. Each round, issue one\n"
        "command per unit, one per line:\n"
        "COMMAND: unit=<id> move_to=(x,y)\n"
        "COMMAND: unit=<id> capture\n"
        "COMMAND: unit=<id> scout\n"
        "move_to walks up to the unit's speed along a shortest path; capture\n"
        "claims an objective on the unit's cell; scout doubles vision this round.\n"
        "Hidden objectives appear only once a unit sees their cell."
    ),
    turn_skeleton=(
        "AVAILABLE INPUTS: {channel_inventory}\n"
        "{state_description}\n"
        "{guidance_note}"
        "Issue commands for this round, one COMMAND line per unit."
    ),
)

SHOWDOWN_ACTIVE_TEMPLATE = PromptTemplate(
    game_id=GameId.SHOWDOWN,
    system_text=(
        "You are a player in a four-player arena. Move on the grid, place bombs\n"
        "to destroy crates and eliminate opponents, and be the last one standing.\n"
        "Bombs explode in a cross after a fuse; blasts chain other bombs.\n"
        "Listen for sound cues: bombs may be placed outside your view.\n"
        "Reply with exactly one line:\n"
        "ACTION: <move_north|move_south|move_east|move_west|place_bomb|wait>"
    ),
    turn_skeleton=(
        "AVAILABLE INPUTS: {channel_inventory}\n"
        "YOU ARE: player {player_id}\n"
        "{state_description}\n"
        "SOUND_CUES_THIS_TICK: {cue_summary}\n"
        "Choose your action. Reply with one ACTION line."
    ),
)

SHOWDOWN_OBSERVER_TEMPLATE = PromptTemplate(
    game_id=GameId.SHOWDOWN,
    system_text=SHOWDOWN_ACTIVE_TEMPLATE.system_text,
    turn_skeleton=(
        "AVAILABLE INPUTS: {channel_inventory}\n"
        "YOU ARE: player {player_id} (observing; you have been eliminated)\n"
        "{state_description}\n"
        "SOUND_CUES_THIS_TICK: {cue_summary}\n"
        "No action is required."
    ),
)
