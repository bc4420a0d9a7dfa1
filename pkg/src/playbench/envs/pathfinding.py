"""Seeded first-person maze navigation with spoken guidance.

The maze is a perfect maze (fully connected, acyclic) carved by an
iterative recursive backtracker over a room lattice: the wall grid has odd
dimensions, rooms sit at odd coordinates, passages at the midpoints
between rooms. Positions are continuous in wall-grid cell units; headings
are compass degrees (0 = north, 90 = east, clockwise positive).
"""

from __future__ import annotations

import math
import re
from collections import deque
from dataclasses import dataclass, replace
from typing import Any, Optional

import numpy as np

from .. import rng as rngmod
from ..engine import Environment
from ..render import frames
from ..render.prompts import PATHFINDING_TEMPLATE, assemble_prompt
from ..types import (
    ActionEnvelope,
    AudioKind,
    AudioPayload,
    Difficulty,
    GameId,
    ObservationBundle,
    Outcome,
    canonical_json,
    sha256_hex,
)

GRID_SIZES = {Difficulty.EASY: 7, Difficulty.MEDIUM: 11, Difficulty.HARD: 15}
MIN_BFS_DISTANCE = {Difficulty.EASY: 5, Difficulty.MEDIUM: 8, Difficulty.HARD: 14}
GOAL_RADIUS = 0.5
_WALL_EPS = 1e-9

# (dx, dy) in (col, row) coords; north is -y.
_CARDINALS = {"north": (0, -1), "east": (1, 0), "south": (0, 1), "west": (-1, 0)}


@dataclass
class Maze:
    width: int
    height: int
    walls: np.ndarray  # bool (height, width); True = wall
    start_cell: tuple[int, int]
    target_cell: tuple[int, int]

    def passable(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height and not self.walls[y, x]


@dataclass(frozen=True)
class NavState:
    x: float
    y: float
    heading: float  # degrees in [0, 360)
    steps_taken: int = 0
    invalid_count: int = 0
    target_visible: bool = False  # unobstructed line of sight to the target


@dataclass(frozen=True)
class NavAction:
    rotate_deg: float
    move_units: float


def generate_maze(seed: int, difficulty: Difficulty) -> Maze:
    """Carve a perfect maze and pick a start/target pair far enough apart.

    The start/target pair is redrawn until their BFS distance over the
    wall grid meets the difficulty floor, so generation always succeeds.
    """
    size = GRID_SIZES[difficulty]
    rooms = (size - 1) // 2
    gen = rngmod.substream(seed, rngmod.LAYOUT)

    walls = np.ones((size, size), dtype=bool)
    visited = np.zeros((rooms, rooms), dtype=bool)
    stack = [(int(gen.integers(rooms)), int(gen.integers(rooms)))]
    visited[stack[0][1], stack[0][0]] = True
    walls[2 * stack[0][1] + 1, 2 * stack[0][0] + 1] = False
    while stack:
        cx, cy = stack[-1]
        neighbors = [
            (cx + dx, cy + dy)
            for dx, dy in ((0, -1), (1, 0), (0, 1), (-1, 0))
            if 0 <= cx + dx < rooms and 0 <= cy + dy < rooms and not visited[cy + dy, cx + dx]
        ]
        if not neighbors:
            stack.pop()
            continue
        nx, ny = neighbors[int(gen.integers(len(neighbors)))]
        visited[ny, nx] = True
        walls[2 * ny + 1, 2 * nx + 1] = False
        walls[cy + ny + 1, cx + nx + 1] = False  # passage midpoint
        stack.append((nx, ny))

    room_cells = [(2 * i + 1, 2 * j + 1) for j in range(rooms) for i in range(rooms)]
    floor = MIN_BFS_DISTANCE[difficulty]
    while True:
        start = room_cells[int(gen.integers(len(room_cells)))]
        target = room_cells[int(gen.integers(len(room_cells)))]
        if start == target:
            continue
        maze = Maze(size, size, walls, start, target)
        if bfs_distance(maze, start, target) >= floor:
            return maze


def bfs_path(maze: Maze, src: tuple[int, int], dst: tuple[int, int]) -> Optional[list[tuple[int, int]]]:
    """Shortest cell path src..dst over the wall grid (4-connected)."""
    if src == dst:
        return [src]
    prev: dict[tuple[int, int], tuple[int, int]] = {src: src}
    queue = deque([src])
    while queue:
        cx, cy = queue.popleft()
        for dx, dy in _CARDINALS.values():
            nxt = (cx + dx, cy + dy)
            if nxt in prev or not maze.passable(*nxt):
                continue
            prev[nxt] = (cx, cy)
            if nxt == dst:
                path = [nxt]
                while path[-1] != src:
                    path.append(prev[path[-1]])
                return path[::-1]
            queue.append(nxt)
    return None


def bfs_distance(maze: Maze, src: tuple[int, int], dst: tuple[int, int]) -> int:
    path = bfs_path(maze, src, dst)
    return len(path) - 1 if path else -1


def wall_distance(maze: Maze, x: float, y: float, heading: float) -> float:
    """Distance to the nearest wall boundary along a compass heading."""
    dist = frames.raycast_distances(maze.walls, (x, y), np.array([heading]))
    return float(dist[0])


def can_see_target(maze: Maze, x: float, y: float) -> bool:
    """Unobstructed line of sight from (x, y) to the target center."""
    tx, ty = _center(maze.target_cell)
    distance = math.dist((x, y), (tx, ty))
    if distance < 1e-9:
        return True
    bearing = math.degrees(math.atan2(tx - x, -(ty - y))) % 360.0
    return wall_distance(maze, x, y, bearing) >= distance


def nav_step(state: NavState, maze: Maze, action: NavAction) -> NavState:
    """Rotate, then move with truncation at the first wall (no sliding).

    Non-finite action fields make the action invalid: a no-op apart from
    the step and invalid counters.
    """
    if not (math.isfinite(action.rotate_deg) and math.isfinite(action.move_units)):
        return replace(
            state, steps_taken=state.steps_taken + 1, invalid_count=state.invalid_count + 1
        )
    heading = (state.heading + action.rotate_deg) % 360.0
    move = min(max(action.move_units, 0.0), 1.0)
    x, y = state.x, state.y
    if move > 0.0:
        limit = wall_distance(maze, x, y, heading)
        travel = min(move, max(limit - _WALL_EPS, 0.0))
        theta = math.radians(heading)
        x += math.sin(theta) * travel
        y += -math.cos(theta) * travel
    return NavState(x=x, y=y, heading=heading, steps_taken=state.steps_taken + 1,
                    invalid_count=state.invalid_count,
                    target_visible=can_see_target(maze, x, y))


def _cell_of(x: float, y: float) -> tuple[int, int]:
    return int(math.floor(x)), int(math.floor(y))


def _bearing_to(state: NavState, point: tuple[float, float]) -> float:
    """Compass bearing from the agent to a point."""
    dx = point[0] - state.x
    dy = point[1] - state.y
    return math.degrees(math.atan2(dx, -dy)) % 360.0


def _relative(bearing: float, heading: float) -> float:
    """Relative angle in (-180, 180]; positive = clockwise (to the right)."""
    rel = (bearing - heading) % 360.0
    return rel - 360.0 if rel > 180.0 else rel


_SECTORS = [
    (-22.5, 22.5, "ahead"),
    (22.5, 67.5, "ahead-right"),
    (67.5, 112.5, "right"),
    (112.5, 157.5, "behind-right"),
    (-67.5, -22.5, "ahead-left"),
    (-112.5, -67.5, "left"),
    (-157.5, -112.5, "behind-left"),
]


def bearing_word(rel: float) -> str:
    for lo, hi, word in _SECTORS:
        if lo < rel <= hi:
            return word
    return "behind"


_TURN_PHRASES = {
    "ahead": "move forward",
    "ahead-right": "turn slightly right, then move forward",
    "right": "turn right, then move forward",
    "behind-right": "turn sharply right, then move forward",
    "behind": "turn around, then move forward",
    "behind-left": "turn sharply left, then move forward",
    "left": "turn left, then move forward",
    "ahead-left": "turn slightly left, then move forward",
}


def _guidance_geometry(state: NavState, maze: Maze) -> tuple[str, int]:
    """(relative-direction word, straight-run length in cells) toward the
    next waypoint of the shortest path, recomputed from scratch."""
    here = _cell_of(state.x, state.y)
    path = bfs_path(maze, here, maze.target_cell)
    if path is None or len(path) < 2:
        return "ahead", max(1, round(math.dist((state.x, state.y), _center(maze.target_cell))))
    nxt = path[1]
    rel = _relative(_bearing_to(state, _center(nxt)), state.heading)
    word = bearing_word(rel)
    # Count how far the path continues in the same direction before turning.
    run = 1
    step = (path[1][0] - path[0][0], path[1][1] - path[0][1])
    for a, b in zip(path[1:], path[2:]):
        if (b[0] - a[0], b[1] - a[1]) != step:
            break
        run += 1
    return word, run


def _center(cell: tuple[int, int]) -> tuple[float, float]:
    return cell[0] + 0.5, cell[1] + 0.5


def guidance_transcript(state: NavState, maze: Maze) -> str:
    """Deterministic spoken-guidance sentence toward the next waypoint."""
    word, run = _guidance_geometry(state, maze)
    phrase = _TURN_PHRASES[word]
    steps = f"{run} step" + ("s" if run != 1 else "")
    return f"Guidance: {phrase} {steps}."


def guidance_arrow(state: NavState, maze: Maze) -> str:
    """On-screen arrow for the frame overlay (the visual cue)."""
    word, _ = _guidance_geometry(state, maze)
    if word == "ahead":
        return "forward"
    if word in ("right", "ahead-right", "behind-right"):
        return "right"
    if word in ("left", "ahead-left", "behind-left"):
        return "left"
    return "around"


# Field order of the state dump is fixed: the text-conflict intervention
# targets HEADING and TARGET_BEARING by name.
_STATE_DUMP_FIELDS = (
    "POSITION_X", "POSITION_Y", "HEADING", "STEPS_TAKEN", "INVALID_ACTIONS",
    "TARGET_X", "TARGET_Y", "TARGET_BEARING",
)


def nav_state_description(state: NavState, maze: Maze) -> str:
    tx, ty = _center(maze.target_cell)
    rel = _relative(_bearing_to(state, (tx, ty)), state.heading)
    values = {
        "POSITION_X": repr(state.x),
        "POSITION_Y": repr(state.y),
        "HEADING": repr(state.heading),
        "STEPS_TAKEN": str(state.steps_taken),
        "INVALID_ACTIONS": str(state.invalid_count),
        "TARGET_X": repr(tx),
        "TARGET_Y": repr(ty),
        "TARGET_BEARING": bearing_word(rel),
    }
    return "\n".join(f"{name}: {values[name]}" for name in _STATE_DUMP_FIELDS)


def parse_state_description(dump: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for line in dump.splitlines():
        if ": " in line:
            key, value = line.split(": ", 1)
            out[key] = value
    return out


_ACTION_RE = re.compile(
    r"action\s*:\s*rotate\s*=\s*(-?\d+(?:\.\d+)?)\s+move\s*=\s*(-?\d+(?:\.\d+)?)",
    re.IGNORECASE,
)


class PathfindingEnv(Environment):
    def reset(self) -> None:
        self.maze = generate_maze(self.descriptor.seed, self.descriptor.difficulty)
        sx, sy = _center(self.maze.start_cell)
        # Initial heading faces the first leg of the shortest path.
        path = bfs_path(self.maze, self.maze.start_cell, self.maze.target_cell)
        first = path[1] if path and len(path) > 1 else self.maze.target_cell
        probe = NavState(x=sx, y=sy, heading=0.0)
        heading = round(_bearing_to(probe, _center(first)) / 90.0) % 4 * 90.0
        self.state = NavState(
            x=sx, y=sy, heading=heading, target_visible=can_see_target(self.maze, sx, sy)
        )

    def system_prompt(self) -> str:
        return PATHFINDING_TEMPLATE.system_text

    def observe(self) -> ObservationBundle:
        frame = frames.render_maze_view(
            self.maze.walls,
            (self.state.x, self.state.y),
            self.state.heading,
            _center(self.maze.target_cell),
            arrow=guidance_arrow(self.state, self.maze),
        )
        transcript = guidance_transcript(self.state, self.maze)
        audio = AudioPayload(kind=AudioKind.TRANSCRIPT, transcript=transcript)
        text = assemble_prompt(
            PATHFINDING_TEMPLATE.turn_skeleton,
            {
                "channel_inventory": "image, audio, text",
                "state_description": nav_state_description(self.state, self.maze),
            },
        )
        return ObservationBundle(text=text, frame=frame, audio=audio)

    def parse_action(self, raw_text: str) -> ActionEnvelope:
        matches = _ACTION_RE.findall(raw_text or "")
        if matches:
            rotate, move = (float(v) for v in matches[-1])
            if (
                math.isfinite(rotate) and math.isfinite(move)
                and -180.0 <= rotate <= 180.0 and 0.0 <= move <= 1.0
            ):
                return ActionEnvelope(
                    game_id=GameId.PATHFINDING,
                    payload={"rotate_deg": rotate, "move_units": move},
                    raw_text=raw_text,
                    valid=True,
                )
        return ActionEnvelope(
            game_id=GameId.PATHFINDING,
            payload={"rotate_deg": 0.0, "move_units": 0.0},
            raw_text=raw_text,
            valid=False,
        )

    def apply(self, envelope: ActionEnvelope) -> str:
        if not envelope.valid:
            self.state = replace(
                self.state,
                steps_taken=self.state.steps_taken + 1,
                invalid_count=self.state.invalid_count + 1,
            )
            return "invalid action: no-op"
        action = NavAction(envelope.payload["rotate_deg"], envelope.payload["move_units"])
        self.state = nav_step(self.state, self.maze, action)
        return f"moved to ({self.state.x:.3f}, {self.state.y:.3f}) heading {self.state.heading:.1f}"

    def _at_goal(self) -> bool:
        tx, ty = _center(self.maze.target_cell)
        return math.dist((self.state.x, self.state.y), (tx, ty)) <= GOAL_RADIUS

    def episode_over(self) -> Optional[Outcome]:
        return Outcome.GOAL_REACHED if self._at_goal() else None

    def raw_metrics(self) -> dict[str, Any]:
        return {
            "steps": self.state.steps_taken,
            "invalid_actions": self.state.invalid_count,
            "goal_reached": self._at_goal(),
            "shortest_path_steps": bfs_distance(self.maze, self.maze.start_cell, self.maze.target_cell),
        }

    def state_digest(self) -> str:
        # World state only: the step/invalid counters are accounting and
        # must not make an invalid (no-op) action look like a transition.
        body = {
            "walls": sha256_hex(self.maze.walls.tobytes()),
            "start": list(self.maze.start_cell),
            "target": list(self.maze.target_cell),
            "x": self.state.x,
            "y": self.state.y,
            "heading": self.state.heading,
        }
        return sha256_hex(canonical_json(body).encode("utf-8"))

    def legal_action_schema(self) -> dict[str, Any]:
        return {
            "kind": "continuous_nav",
            "form": "ACTION: rotate=<deg> move=<units>",
            "rotate_range": [-180.0, 180.0],
            "move_range": [0.0, 1.0],
        }
