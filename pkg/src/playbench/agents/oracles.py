"""Per-game oracle agents: ceiling/test instruments.

Oracles bind the environment they instrument in begin_episode; they are
allowed to read ground truth (that is their job). The melody oracle is
the exception: it deduces the mapping purely from the textual feedback,
exactly the way a competent player would."""

from __future__ import annotations

import re
from typing import TYPE_CHECKING, Optional

from .. import rng as rngmod
from ..envs import melody as melody_mod
from ..envs.pathfinding import _bearing_to, _cell_of, _center, bfs_path
from ..envs.showdown import survivor_policy
from ..types import GameId
from .base import AgentConnector

if TYPE_CHECKING:
    from ..engine import Environment


class PathfindingOracle(AgentConnector):
    """Walks the shortest path: one cell per action, rotating as needed."""

    agent_id = "oracle:pathfinding"

    def begin_episode(self, env: "Environment") -> None:
        self._env = env

    def act(self, system_prompt, bundle, history) -> str:
        env = self._env
        state, maze = env.state, env.maze
        here = _cell_of(state.x, state.y)
        path = bfs_path(maze, here, maze.target_cell)
        waypoint = path[1] if path and len(path) > 1 else maze.target_cell
        bearing = _bearing_to(state, _center(waypoint))
        rel = (bearing - state.heading) % 360.0
        if rel > 180.0:
            rel -= 360.0
        return f"ACTION: rotate={rel:.4f} move=1"


class EchoesOracle(AgentConnector):
    """Transcribes and executes the ground-truth sequence."""

    agent_id = "oracle:echoes"

    def begin_episode(self, env: "Environment") -> None:
        self._env = env

    def act(self, system_prompt, bundle, history) -> str:
        env = self._env
        if env.phase == 1:
            items = "; ".join(f"({r},{c})={icon}" for (r, c), icon, _ in env.sequence.items)
            return f"SEQUENCE: {items}"
        coord = env.sequence.items[env.cursor][0]
        return f"CLICK: ({coord[0]},{coord[1]})"


_LAST_NOTE_RE = re.compile(r"LAST_NOTE: (\S+)")
_PROGRESS_RE = re.compile(r"SCALE_PROGRESS: (\d+)/")


class MelodyOracle(AgentConnector):
    """Probe-then-play deducer working from textual feedback only.

    Probes each color once (learning one (color, note) pair per probe
    from the LAST_NOTE feedback field), then plays the scale from
    wherever the progress cursor landed. At most 14 clicks."""

    agent_id = "oracle:melody"

    def begin_episode(self, env: "Environment") -> None:
        self._known: dict[str, str] = {}
        self._untested = list(melody_mod.COLORS)
        self._last_click: Optional[str] = None

    def act(self, system_prompt, bundle, history) -> str:
        text = bundle.text or ""
        if self._last_click is not None:
            note_match = _LAST_NOTE_RE.search(text)
            if note_match and note_match.group(1) != "none":
                self._known[self._last_click] = note_match.group(1)
        if self._untested:
            color = self._untested.pop(0)
        else:
            progress_match = _PROGRESS_RE.search(text)
            cursor = int(progress_match.group(1)) if progress_match else 0
            needed = melody_mod.TARGET_SCALE[cursor]
            inverse = {note: color for color, note in self._known.items()}
            color = inverse.get(needed, melody_mod.COLORS[0])
        self._last_click = color
        return f"CLICK: {color}"


class PhantomPlanner(AgentConnector):
    """Greedy planner mirroring the round heuristic's assignment.

    Recomputes the greedy unit-to-objective plan whenever the set of open
    discovered objectives changes, walks each unit along its plan, and
    captures on arrival. Units without targets sweep corners for hidden
    objectives."""

    agent_id = "oracle:phantom"

    def begin_episode(self, env: "Environment") -> None:
        self._env = env
        self._plan: dict[str, list] = {}
        self._plan_key: Optional[frozenset] = None

    def act(self, system_prompt, bundle, history) -> str:
        from ..envs.phantom import planner_assignment

        tmap = self._env.map
        open_objs = [o for o in tmap.objectives if o.discovered and not o.completed]
        key = frozenset(o.obj_id for o in open_objs)
        if key != self._plan_key:
            self._plan = planner_assignment(tmap, open_objs)
            self._plan_key = key
        corners = [
            (tmap.grid - 2, tmap.grid - 2), (1, tmap.grid - 2), (tmap.grid - 2, 1), (1, 1),
        ]
        lines = []
        for unit in tmap.units:
            queue = [o for o in self._plan.get(unit.unit_id, []) if not o.completed]
            if queue:
                obj = queue[0]
                if unit.pos == obj.pos:
                    lines.append(f"COMMAND: unit={unit.unit_id} capture")
                else:
                    lines.append(f"COMMAND: unit={unit.unit_id} move_to=({obj.pos[0]},{obj.pos[1]})")
            elif any(not o.discovered for o in tmap.objectives):
                corner = corners[(tmap.round // 5) % len(corners)]
                lines.append(f"COMMAND: unit={unit.unit_id} move_to=({corner[0]},{corner[1]})")
            else:
                lines.append(f"COMMAND: unit={unit.unit_id} scout")
        return "\n".join(lines)


class ShowdownSurvivor(AgentConnector):
    """Rule-based survivor wrapping the built-in evasion policy."""

    agent_id = "oracle:showdown"

    def __init__(self, seed: int = 0):
        self._seed = seed
        self._gen = rngmod.substream(seed, f"{rngmod.AGENT}:survivor")
        self._arena = None
        self._pid = 0

    def begin_episode(self, env: "Environment") -> None:
        self._arena = env.arena
        self._pid = env.PLAYER_ID
        self._gen = rngmod.substream(env.descriptor.seed, f"{rngmod.AGENT}:survivor")

    def attach_seat(self, arena, pid: int, seed: int) -> None:
        """Tournament hook: play seat `pid` of a live match."""
        self._arena = arena
        self._pid = pid
        self._gen = rngmod.substream(seed, f"{rngmod.AGENT}:survivor:{pid}")

    def act(self, system_prompt, bundle, history) -> str:
        return f"ACTION: {survivor_policy(self._arena, self._pid, self._gen)}"


def oracle_agent(game_id: GameId | str) -> AgentConnector:
    game_id = GameId(game_id)
    return {
        GameId.PATHFINDING: PathfindingOracle,
        GameId.ECHOES: EchoesOracle,
        GameId.MELODY: MelodyOracle,
        GameId.PHANTOM: PhantomPlanner,
        GameId.SHOWDOWN: ShowdownSurvivor,
    }[game_id]()
