"""Random baseline: uniform over each game's discrete action menu.

The continuous pathfinding action space is discretized to
{-90, -45, 0, 45, 90} degrees x {0, 1} move units for this baseline.
Menu-constrained sampling means the random agent never emits an invalid
action. Per-episode seeding makes random runs reproducible."""

from __future__ import annotations

import re
from typing import TYPE_CHECKING

import numpy as np

from .. import rng as rngmod
from ..envs.echoes import GRID_DIMS
from ..envs.phantom import _PARAMS as PHANTOM_PARAMS
from ..envs.showdown import ACTIONS as SHOWDOWN_ACTIONS
from ..render.frames import ICON_GLYPHS, MELODY_COLORS
from ..types import GameId
from .base import AgentConnector

if TYPE_CHECKING:
    from ..engine import Environment

ROTATE_MENU = (-90.0, -45.0, 0.0, 45.0, 90.0)
MOVE_MENU = (0.0, 1.0)
_OBJECTIVE_RE = re.compile(r"\w+ pos=\((\d+),(\d+)\) points=[\d.]+ status=open")


class RandomAgent(AgentConnector):
    agent_id = "random"

    def __init__(self, game_id: GameId, seed: int = 0):
        self.game_id = GameId(game_id)
        self._seed = seed
        self._gen = rngmod.substream(seed, rngmod.AGENT)
        self._difficulty = None
        self._grid = None
        self._step = 0

    def begin_episode(self, env: "Environment") -> None:
        # Reseed from the episode so each episode's stream is reproducible
        # independent of run order.
        self._gen = rngmod.substream(env.descriptor.seed, f"{rngmod.AGENT}:random")
        self._difficulty = env.descriptor.difficulty
        self._step = 0

    def attach_seat(self, arena, pid: int, seed: int) -> None:
        self._gen = rngmod.substream(seed, f"{rngmod.AGENT}:random:{pid}")
        self._step = 0

    def act(self, system_prompt, bundle, history) -> str:
        gen = self._gen
        step = self._step
        self._step += 1
        if self.game_id is GameId.PATHFINDING:
            rotate = ROTATE_MENU[int(gen.integers(len(ROTATE_MENU)))]
            move = MOVE_MENU[int(gen.integers(len(MOVE_MENU)))]
            return f"ACTION: rotate={rotate:g} move={move:g}"
        if self.game_id is GameId.ECHOES:
            rows, cols = GRID_DIMS[self._difficulty]
            coord = (int(gen.integers(rows)), int(gen.integers(cols)))
            if step == 0:
                # One uniformly sampled guess is the random "transcription".
                icon = ICON_GLYPHS[int(gen.integers(len(ICON_GLYPHS)))]
                return f"SEQUENCE: ({coord[0]},{coord[1]})={icon}"
            return f"CLICK: ({coord[0]},{coord[1]})"
        if self.game_id is GameId.MELODY:
            colors = list(MELODY_COLORS)
            return f"CLICK: {colors[int(gen.integers(len(colors)))]}"
        if self.game_id is GameId.PHANTOM:
            units = PHANTOM_PARAMS[self._difficulty]["units"]
            grid = PHANTOM_PARAMS[self._difficulty]["grid"]
            # The available command menu per unit: move to any known open
            # objective, move to a random cell, capture, or scout.
            known = _OBJECTIVE_RE.findall(bundle.text or "")
            lines = []
            for i in range(len(units)):
                menu_size = len(known) + 3
                pick = int(gen.integers(menu_size))
                if pick < len(known):
                    x, y = known[pick]
                    lines.append(f"COMMAND: unit=u{i + 1} move_to=({x},{y})")
                elif pick == len(known):
                    x, y = int(gen.integers(grid)), int(gen.integers(grid))
                    lines.append(f"COMMAND: unit=u{i + 1} move_to=({x},{y})")
                elif pick == len(known) + 1:
                    lines.append(f"COMMAND: unit=u{i + 1} capture")
                else:
                    lines.append(f"COMMAND: unit=u{i + 1} scout")
            return "\n".join(lines)
        if self.game_id is GameId.SHOWDOWN:
            action = SHOWDOWN_ACTIONS[int(gen.integers(len(SHOWDOWN_ACTIONS)))]
            return f"ACTION: {action}"
        raise ValueError(f"unknown game for random agent: {self.game_id}")


def sample_showdown_action(gen: np.random.Generator) -> str:
    """Bare menu draw (used by distribution tests)."""
    return SHOWDOWN_ACTIONS[int(gen.integers(len(SHOWDOWN_ACTIONS)))]
