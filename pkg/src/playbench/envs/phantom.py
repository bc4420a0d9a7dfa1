"""Squad tactics under fog of war with normalized objective scoring.

A handful of units (optionally including a faster, longer-sighted scout)
move over seeded terrain to capture objectives before the round limit.
Hidden objectives only become known once a unit's vision covers them, and
they carry the larger point values, so discovery is where the difficulty
lives. Scoring normalizes earned points against a theoretical ceiling
built from the round-bonus/efficiency-bonus formulas and the R_opt
heuristic.
"""

from __future__ import annotations

import math
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .. import rng as rngmod
from ..engine import Environment
from ..render import frames
from ..render.prompts import PHANTOM_TEMPLATE, assemble_prompt
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

SPEEDS = {"scout": 4, "infantry": 3}
VISION = {"scout": 6, "infantry": 3}
OBSTACLE_FRACTION = 0.10

# Per difficulty: grid side, unit kinds, visible points, hidden points,
# round cap, dynamic-bonus pool (fraction of S_base).
_PARAMS = {
    Difficulty.EASY: dict(
        grid=16, units=("infantry", "infantry", "infantry"),
        visible=(30, 30, 40), hidden=(), r_max=20, dynamic=0.0,
    ),
    Difficulty.MEDIUM: dict(
        grid=20, units=("scout", "infantry", "infantry", "infantry"),
        visible=(15, 15, 15), hidden=(55,), r_max=25, dynamic=0.0,
    ),
    Difficulty.HARD: dict(
        grid=24, units=("scout", "infantry", "infantry", "infantry"),
        visible=(12, 12, 12), hidden=(32, 32), r_max=30, dynamic=0.20,
    ),
}

DISCOVERY_ROUNDS_PER_HIDDEN = 2
EXPLORATION_OVERHEAD = 1
AUX_CAP_FRACTION = 0.05


@dataclass
class Unit:
    unit_id: str
    kind: str  # "scout" | "infantry"
    pos: tuple[int, int]
    scouting: bool = False  # doubled vision for the current round

    @property
    def speed(self) -> int:
        return SPEEDS[self.kind]

    @property
    def vision(self) -> int:
        return VISION[self.kind] * (2 if self.scouting else 1)


@dataclass
class Objective:
    obj_id: str
    pos: tuple[int, int]
    points: float
    hidden: bool
    discovered: bool
    completed: bool = False
    dynamic: bool = False


@dataclass
class TacticalMap:
    grid: int
    passable: np.ndarray  # bool (grid, grid)
    units: list[Unit]
    objectives: list[Objective]
    r_max: int
    dynamic_pool: float  # bonus points spawned mid-game (hard only)
    round: int = 0
    fog: np.ndarray = field(default=None)  # True = currently visible

    def initial_objectives(self) -> list[Objective]:
        return [o for o in self.objectives if not o.dynamic]

    def s_base(self) -> float:
        return float(sum(o.points for o in self.initial_objectives()))


@dataclass
class PhantomScore:
    s_main: float
    s_aux: float
    s_base: float
    s_max: float
    b_rounds: float
    b_efficiency: float
    b_dynamic: float
    r_opt: int
    r_max: int
    rounds_used: int
    success_rate: float
    s_norm: float


def _bfs_grid(passable: np.ndarray, src: tuple[int, int]) -> np.ndarray:
    """Grid of BFS distances from src (-1 where unreachable)."""
    h, w = passable.shape
    dist = np.full((h, w), -1, dtype=np.int32)
    dist[src[1], src[0]] = 0
    queue = deque([src])
    while queue:
        x, y = queue.popleft()
        for dx, dy in ((0, -1), (1, 0), (0, 1), (-1, 0)):
            nx, ny = x + dx, y + dy
            if 0 <= nx < w and 0 <= ny < h and passable[ny, nx] and dist[ny, nx] < 0:
                dist[ny, nx] = dist[y, x] + 1
                queue.append((nx, ny))
    return dist


def _bfs_path(passable: np.ndarray, src: tuple[int, int], dst: tuple[int, int]) -> Optional[list[tuple[int, int]]]:
    dist = _bfs_grid(passable, dst)
    if dist[src[1], src[0]] < 0:
        return None
    path = [src]
    cur = src
    while cur != dst:
        x, y = cur
        for dx, dy in ((0, -1), (1, 0), (0, 1), (-1, 0)):
            nx, ny = x + dx, y + dy
            if 0 <= nx < dist.shape[1] and 0 <= ny < dist.shape[0] and dist[ny, nx] == dist[y, x] - 1:
                cur = (nx, ny)
                break
        path.append(cur)
    return path


def generate_scenario(seed: int, difficulty: Difficulty) -> TacticalMap:
    """Seeded terrain, unit roster, and objective placement.

    Everything is placed on the largest connected passable component, so
    all objectives are reachable by construction.
    """
    params = _PARAMS[difficulty]
    grid = params["grid"]
    gen = rngmod.substream(seed, rngmod.LAYOUT)

    passable = np.ones((grid, grid), dtype=bool)
    n_blobs = int(grid * grid * OBSTACLE_FRACTION / 3)
    for _ in range(n_blobs):
        cx, cy = int(gen.integers(grid)), int(gen.integers(grid))
        for _ in range(3):
            passable[min(max(cy, 0), grid - 1), min(max(cx, 0), grid - 1)] = False
            cx += int(gen.integers(-1, 2))
            cy += int(gen.integers(-1, 2))

    # Largest connected component of passable cells.
    comp = np.zeros((grid, grid), dtype=np.int32)
    label = 0
    best_label, best_size = 0, 0
    for y in range(grid):
        for x in range(grid):
            if passable[y, x] and comp[y, x] == 0:
                label += 1
                size = 0
                queue = deque([(x, y)])
                comp[y, x] = label
                while queue:
                    qx, qy = queue.popleft()
                    size += 1
                    for dx, dy in ((0, -1), (1, 0), (0, 1), (-1, 0)):
                        nx, ny = qx + dx, qy + dy
                        if 0 <= nx < grid and 0 <= ny < grid and passable[ny, nx] and comp[ny, nx] == 0:
                            comp[ny, nx] = label
                            queue.append((nx, ny))
                if size > best_size:
                    best_label, best_size = label, size
    passable = comp == best_label

    cells = [(x, y) for y in range(grid) for x in range(grid) if passable[y, x]]

    # Spread deployments along the near edge so the greedy assignment
    # mostly resolves one unit per objective.
    anchors = [(1, 1), (grid - 2, 1), (1, grid - 2), (grid // 2, 1)]
    units = []
    used: set[tuple[int, int]] = set()
    for i, kind in enumerate(params["units"]):
        anchor = anchors[i % len(anchors)]
        spot = min(
            (c for c in cells if c not in used),
            key=lambda c: (abs(c[0] - anchor[0]) + abs(c[1] - anchor[1]), c),
        )
        used.add(spot)
        units.append(Unit(unit_id=f"u{i + 1}", kind=kind, pos=spot))

    # Objectives: pairwise separated, each a real march from every
    # deployment; hidden ones land in the half farthest from all units.
    taken = {u.pos for u in units}
    unit_dist = None
    for unit in units:
        d = _bfs_grid(passable, unit.pos)
        d = np.where(d < 0, 10**6, d)
        unit_dist = d if unit_dist is None else np.minimum(unit_dist, d)
    floor = max(4, grid // 3)
    candidates = [
        c for c in cells if c not in taken and floor <= unit_dist[c[1], c[0]] < 10**6
    ]
    candidates.sort(key=lambda c: (int(unit_dist[c[1], c[0]]), c))
    objectives: list[Objective] = []
    min_sep = max(grid // 3, 4)

    def place(count: int, pool: list[tuple[int, int]]) -> list[tuple[int, int]]:
        placed: list[tuple[int, int]] = []
        idx = 0
        while len(placed) < count and idx < len(pool):
            cand = pool[int(gen.integers(len(pool)))]
            if all(abs(cand[0] - p[0]) + abs(cand[1] - p[1]) >= min_sep for p in placed) and cand not in taken:
                placed.append(cand)
                taken.add(cand)
            idx += 1
        # Fallback: relax separation if the component is cramped.
        while len(placed) < count:
            for cand in pool:
                if cand not in taken:
                    placed.append(cand)
                    taken.add(cand)
                    break
        return placed

    visible_cells = place(len(params["visible"]), candidates)
    far_pool = candidates[len(candidates) // 2:] or candidates
    hidden_cells = place(len(params["hidden"]), far_pool)

    names = "ABCDEFG"
    for i, (pos, pts) in enumerate(zip(visible_cells, params["visible"])):
        objectives.append(Objective(obj_id=names[i], pos=pos, points=float(pts), hidden=False, discovered=True))
    for j, (pos, pts) in enumerate(zip(hidden_cells, params["hidden"])):
        objectives.append(
            Objective(obj_id=names[len(visible_cells) + j], pos=pos, points=float(pts), hidden=True, discovered=False)
        )

    tmap = TacticalMap(
        grid=grid,
        passable=passable,
        units=units,
        objectives=objectives,
        r_max=params["r_max"],
        dynamic_pool=params["dynamic"] * sum(params["visible"]) + params["dynamic"] * sum(params["hidden"]),
    )
    tmap.fog = _visible_mask(tmap)
    _discover(tmap)
    return tmap


def _visible_mask(tmap: TacticalMap) -> np.ndarray:
    mask = np.zeros((tmap.grid, tmap.grid), dtype=bool)
    yy, xx = np.mgrid[0:tmap.grid, 0:tmap.grid]
    for unit in tmap.units:
        radius = unit.vision
        mask |= np.maximum(np.abs(xx - unit.pos[0]), np.abs(yy - unit.pos[1])) <= radius
    return mask


def _discover(tmap: TacticalMap) -> None:
    for obj in tmap.objectives:
        if not obj.discovered and tmap.fog[obj.pos[1], obj.pos[0]]:
            obj.discovered = True


def greedy_assignment(
    tmap: TacticalMap,
    objectives: list[Objective],
    round_up_legs: bool = False,
    capture_rounds: bool = False,
) -> tuple[dict[str, list[Objective]], dict[str, float]]:
    """Greedy unit-to-objective assignment by earliest arrival.

    Repeatedly assigns the (unit, objective) pair with the smallest
    arrival clock (BFS path length over unit speed), unit positions
    advancing to each claimed objective. With round_up_legs, each leg's
    travel is counted in whole rounds (movement cannot carry over a
    fractional round into the next leg); with capture_rounds, a capture
    round per claimed objective is added to the clock.
    """
    clocks = {u.unit_id: 0.0 for u in tmap.units}
    pos = {u.unit_id: u.pos for u in tmap.units}
    speed = {u.unit_id: u.speed for u in tmap.units}
    plan: dict[str, list[Objective]] = {u.unit_id: [] for u in tmap.units}
    remaining = list(objectives)
    while remaining:
        # Idle units claim objectives before anyone is re-tasked: a unit
        # only chains once every unit already has an assignment.
        min_load = min(len(v) for v in plan.values())
        best: Optional[tuple[float, str, Objective]] = None
        for unit_id in sorted(clocks):
            if len(plan[unit_id]) > min_load:
                continue
            dist_grid = _bfs_grid(tmap.passable, pos[unit_id])
            for obj in remaining:
                d = int(dist_grid[obj.pos[1], obj.pos[0]])
                if d < 0:
                    continue
                leg = d / speed[unit_id]
                eta = clocks[unit_id] + (math.ceil(leg) if round_up_legs else leg)
                if capture_rounds:
                    eta += 1
                if best is None or (eta, unit_id, obj.obj_id) < (best[0], best[1], best[2].obj_id):
                    best = (eta, unit_id, obj)
        if best is None:
            break
        eta, unit_id, obj = best
        clocks[unit_id] = eta
        pos[unit_id] = obj.pos
        plan[unit_id].append(obj)
        remaining.remove(obj)
    return plan, clocks


def bottleneck_assignment(
    tmap: TacticalMap, objectives: list[Objective]
) -> Optional[dict[str, list[Objective]]]:
    """One-objective-per-unit matching minimizing the slowest arrival.

    Captures then run in parallel, which is why a planner following this
    matching finishes within the greedy travel bound plus one round.
    Returns None when there are more objectives than units."""
    import itertools

    if len(objectives) > len(tmap.units):
        return None
    units = sorted(tmap.units, key=lambda u: u.unit_id)
    dist_grids = {u.unit_id: _bfs_grid(tmap.passable, u.pos) for u in units}

    def eta(unit: Unit, obj: Objective) -> float:
        d = int(dist_grids[unit.unit_id][obj.pos[1], obj.pos[0]])
        return math.inf if d < 0 else d / unit.speed

    best: Optional[tuple[float, tuple[int, ...]]] = None
    for perm in itertools.permutations(range(len(units)), len(objectives)):
        worst = max((eta(units[ui], obj) for ui, obj in zip(perm, objectives)), default=0.0)
        if best is None or (worst, perm) < best:
            best = (worst, perm)
    if best is None or best[0] == math.inf:
        return None
    plan: dict[str, list[Objective]] = {u.unit_id: [] for u in units}
    for ui, obj in zip(best[1], objectives):
        plan[units[ui].unit_id].append(obj)
    return plan


def planner_assignment(tmap: TacticalMap, objectives: list[Objective]) -> dict[str, list[Objective]]:
    """Assignment a live planner should follow: the cheaper of the
    one-per-unit matching and capture-aware greedy chaining, measured in
    realistic completion rounds (whole rounds per leg plus one capture
    round per objective)."""
    greedy_plan, _ = greedy_assignment(tmap, objectives, round_up_legs=True, capture_rounds=True)

    def completion(plan: dict[str, list[Objective]]) -> int:
        worst = 0
        for unit in tmap.units:
            rounds = 0
            pos = unit.pos
            for obj in plan.get(unit.unit_id, []):
                grid_d = _bfs_grid(tmap.passable, pos)
                d = int(grid_d[obj.pos[1], obj.pos[0]])
                if d < 0:
                    return 10**6
                rounds += math.ceil(d / unit.speed) + 1
                pos = obj.pos
            worst = max(worst, rounds)
        return worst

    bneck_plan = bottleneck_assignment(tmap, objectives)
    if bneck_plan is not None and completion(bneck_plan) <= completion(greedy_plan):
        return bneck_plan
    return greedy_plan


def compute_r_opt(tmap: TacticalMap) -> int:
    """Heuristic minimum rounds: greedy unit-to-objective assignment travel
    time (whole rounds per leg), plus discovery overhead for hidden
    objectives (halved, rounded up, when a scout is on the roster), plus
    one round of exploration overhead."""
    _, clocks = greedy_assignment(tmap, tmap.initial_objectives(), round_up_legs=True)
    travel = math.ceil(max(clocks.values())) if clocks else 0
    hidden = sum(1 for o in tmap.initial_objectives() if o.hidden)
    discovery = DISCOVERY_ROUNDS_PER_HIDDEN * hidden
    if any(u.kind == "scout" for u in tmap.units):
        discovery = math.ceil(discovery / 2)
    return travel + discovery + EXPLORATION_OVERHEAD


def phantom_round(tmap: TacticalMap, commands: list[dict[str, Any]]) -> list[str]:
    """Execute one round of commands (one per unit); returns per-command
    notes. Commands for unknown units are invalid no-ops."""
    notes = []
    units = {u.unit_id: u for u in tmap.units}
    seen_units: set[str] = set()
    for cmd in commands:
        unit = units.get(cmd.get("unit"))
        if unit is None or cmd.get("unit") in seen_units:
            notes.append(f"ignored command for unknown/duplicate unit {cmd.get('unit')!r}")
            continue
        seen_units.add(unit.unit_id)
        op = cmd["op"]
        if op == "move_to":
            tx = min(max(int(cmd["x"]), 0), tmap.grid - 1)
            ty = min(max(int(cmd["y"]), 0), tmap.grid - 1)
            target = _nearest_passable(tmap.passable, (tx, ty))
            path = _bfs_path(tmap.passable, unit.pos, target)
            if path is None or len(path) < 2:
                notes.append(f"{unit.unit_id} holds position")
                continue
            steps = min(unit.speed, len(path) - 1)
            unit.pos = path[steps]
            notes.append(f"{unit.unit_id} moved to {unit.pos}")
        elif op == "scout":
            unit.scouting = True
            notes.append(f"{unit.unit_id} scouting (vision doubled this round)")
        elif op == "capture":
            captured = False
            for obj in tmap.objectives:
                if obj.pos == unit.pos and obj.discovered and not obj.completed:
                    obj.completed = True
                    captured = True
                    notes.append(f"{unit.unit_id} captured objective {obj.obj_id} (+{obj.points:g})")
                    break
            if not captured:
                notes.append(f"{unit.unit_id} found nothing to capture")
        else:
            notes.append(f"{unit.unit_id}: unknown op {op!r}")
    tmap.round += 1
    if tmap.dynamic_pool > 0 and tmap.round == tmap.r_max // 2:
        _spawn_dynamic(tmap)
        notes.append("new bonus objective reported")
    tmap.fog = _visible_mask(tmap)
    _discover(tmap)
    for unit in tmap.units:
        unit.scouting = False  # the boost covers this round's fog only
    return notes


def _nearest_passable(passable: np.ndarray, cell: tuple[int, int]) -> tuple[int, int]:
    if passable[cell[1], cell[0]]:
        return cell
    h, w = passable.shape
    best, best_d = cell, None
    for y in range(h):
        for x in range(w):
            if passable[y, x]:
                d = abs(x - cell[0]) + abs(y - cell[1])
                if best_d is None or d < best_d:
                    best, best_d = (x, y), d
    return best


def _spawn_dynamic(tmap: TacticalMap) -> None:
    # Deterministic position: the passable cell farthest from all units.
    dist = None
    for unit in tmap.units:
        d = _bfs_grid(tmap.passable, unit.pos)
        dist = d if dist is None else np.minimum(dist, d)
    dist = np.where(dist < 0, -1, dist)
    idx = int(np.argmax(dist))
    pos = (idx % tmap.grid, idx // tmap.grid)
    tmap.objectives.append(
        Objective(
            obj_id=f"X{sum(1 for o in tmap.objectives if o.dynamic) + 1}",
            pos=pos,
            points=float(tmap.dynamic_pool),
            hidden=False,
            discovered=True,
            dynamic=True,
        )
    )


def phantom_score(
    s_base: float,
    r_opt: int,
    r_max: int,
    rounds_used: int,
    completed_points: float,
    success_rate: float,
    all_initial_completed: bool,
    b_dynamic: float = 0.0,
    s_aux: float = 0.0,
) -> PhantomScore:
    """Normalized 0-100 score against the theoretical ceiling.

    The ceiling combines the base objective points with a round bonus
    (anchored at R_opt), a flat efficiency bonus, and the dynamic pool.
    Earned points mirror those bonuses: the efficiency bonus accrues with
    objective completion, the round bonus only on full mission success,
    and the capped auxiliary bonus is a tie-breaker added before clamping.
    """
    if r_max <= 0:
        raise ValueError("R_max must be positive")
    b_rounds = s_base * (1.0 - r_opt / r_max) * 0.5
    b_efficiency = s_base * 0.3
    s_max = s_base + b_rounds + b_efficiency + b_dynamic
    earned = completed_points + b_efficiency * success_rate
    if all_initial_completed:
        earned += s_base * max(0.0, 1.0 - rounds_used / r_max) * 0.5
    aux = min(s_aux, AUX_CAP_FRACTION * s_base)
    s_norm = 0.0 if s_max <= 0 else min(100.0, max(0.0, (earned + aux) / s_max * 100.0))
    return PhantomScore(
        s_main=earned,
        s_aux=aux,
        s_base=s_base,
        s_max=s_max,
        b_rounds=b_rounds,
        b_efficiency=b_efficiency,
        b_dynamic=b_dynamic,
        r_opt=r_opt,
        r_max=r_max,
        rounds_used=rounds_used,
        success_rate=success_rate,
        s_norm=s_norm,
    )


_CMD_RE = re.compile(
    r"command\s*:\s*unit\s*=\s*(\w+)\s+(move_to\s*=\s*\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)|capture|scout)",
    re.IGNORECASE,
)


class PhantomEnv(Environment):
    def reset(self) -> None:
        self.map = generate_scenario(self.descriptor.seed, self.descriptor.difficulty)
        self.r_opt = compute_r_opt(self.map)
        self.valid_command_rounds = 0
        self._last_notes: list[str] = []
        self._prev_frame: Optional[np.ndarray] = None

    def system_prompt(self) -> str:
        return PHANTOM_TEMPLATE.system_text

    def _render(self) -> np.ndarray:
        return frames.render_tactical_map(
            self.map.passable,
            self.map.fog,
            [(u.kind, u.pos) for u in self.map.units],
            [(o.pos, o.discovered, o.completed) for o in self.map.objectives],
        )

    def _state_description(self) -> str:
        lines = [f"ROUND: {self.map.round + 1}/{self.map.r_max}", "UNITS:"]
        for u in self.map.units:
            lines.append(f"  {u.unit_id} kind={u.kind} pos=({u.pos[0]},{u.pos[1]}) speed={u.speed} vision={VISION[u.kind]}")
        lines.append("KNOWN_OBJECTIVES:")
        for o in self.map.objectives:
            if o.discovered:
                status = "completed" if o.completed else "open"
                lines.append(f"  {o.obj_id} pos=({o.pos[0]},{o.pos[1]}) points={o.points:g} status={status}")
        hidden_left = sum(1 for o in self.map.objectives if not o.discovered)
        lines.append(f"UNDISCOVERED_OBJECTIVES: {hidden_left}")
        return "\n".join(lines)

    def tactical_transcript(self) -> str:
        """Spoken tactical guidance: per unit, bearing and distance to its
        nearest open discovered objective."""
        sentences = []
        open_objs = [o for o in self.map.objectives if o.discovered and not o.completed]
        for u in self.map.units:
            if not open_objs:
                break
            obj = min(open_objs, key=lambda o: (abs(o.pos[0] - u.pos[0]) + abs(o.pos[1] - u.pos[1]), o.obj_id))
            dx, dy = obj.pos[0] - u.pos[0], obj.pos[1] - u.pos[1]
            ns = "north" if dy < 0 else ("south" if dy > 0 else "")
            ew = "west" if dx < 0 else ("east" if dx > 0 else "")
            bearing = (ns + (" " if ns and ew else "") + ew) or "here"
            dist = abs(dx) + abs(dy)
            sentences.append(
                f"Unit {u.unit_id}: objective {obj.obj_id} bearing {bearing}, distance {dist}."
            )
        if not sentences:
            sentences.append("All known objectives complete. Hold positions.")
        hidden_left = sum(1 for o in self.map.objectives if not o.discovered)
        if hidden_left:
            sentences.append(f"Intel reports {hidden_left} undiscovered objective(s). Recommend scouting.")
        return " ".join(sentences)

    def observe(self) -> ObservationBundle:
        cur = self._render()
        prev = self._prev_frame if self._prev_frame is not None else cur
        video = VideoPayload(frames=[prev, cur], fps=1.0)
        audio = AudioPayload(kind=AudioKind.TRANSCRIPT, transcript=self.tactical_transcript())
        guidance_note = ""
        if self._last_notes:
            guidance_note = "LAST_ROUND: " + "; ".join(self._last_notes) + "\n"
        text = assemble_prompt(
            PHANTOM_TEMPLATE.turn_skeleton,
            {
                "channel_inventory": "video, audio, text",
                "state_description": self._state_description(),
                "guidance_note": guidance_note,
            },
        )
        return ObservationBundle(text=text, video=video, audio=audio)

    def parse_action(self, raw_text: str) -> ActionEnvelope:
        commands = []
        for m in _CMD_RE.finditer(raw_text or ""):
            unit_id = m.group(1).lower()
            body = m.group(2).lower()
            if body.startswith("move_to"):
                commands.append({"unit": unit_id, "op": "move_to", "x": int(m.group(3)), "y": int(m.group(4))})
            elif body == "capture":
                commands.append({"unit": unit_id, "op": "capture"})
            else:
                commands.append({"unit": unit_id, "op": "scout"})
        return ActionEnvelope(
            game_id=GameId.PHANTOM,
            payload={"commands": commands},
            raw_text=raw_text,
            valid=bool(commands),
        )

    def apply(self, envelope: ActionEnvelope) -> str:
        if not envelope.valid:
            return "invalid command sheet: no-op"
        self._prev_frame = self._render()
        commands = envelope.payload["commands"]
        known = {u.unit_id for u in self.map.units}
        all_known = all(c["unit"] in known for c in commands)
        notes = phantom_round(self.map, commands)
        if all_known and commands:
            self.valid_command_rounds += 1
        self._last_notes = notes
        return "; ".join(notes)

    def _all_initial_completed(self) -> bool:
        return all(o.completed for o in self.map.initial_objectives())

    def episode_over(self) -> Optional[Outcome]:
        return Outcome.GOAL_REACHED if self._all_initial_completed() else None

    def score(self) -> PhantomScore:
        initial = self.map.initial_objectives()
        completed_points = sum(o.points for o in self.map.objectives if o.completed)
        success_rate = sum(1 for o in initial if o.completed) / len(initial)
        return phantom_score(
            s_base=self.map.s_base(),
            r_opt=self.r_opt,
            r_max=self.map.r_max,
            rounds_used=self.map.round,
            completed_points=completed_points,
            success_rate=success_rate,
            all_initial_completed=self._all_initial_completed(),
            b_dynamic=self.map.dynamic_pool,
            s_aux=float(self.valid_command_rounds),
        )

    def raw_metrics(self) -> dict[str, Any]:
        score = self.score()
        return {
            "rounds_used": self.map.round,
            "r_opt": score.r_opt,
            "r_max": score.r_max,
            "success_rate": score.success_rate,
            "normalized_score": score.s_norm,
            "s_main": score.s_main,
            "s_max": score.s_max,
        }

    def state_digest(self) -> str:
        body = {
            "passable": sha256_hex(self.map.passable.tobytes()),
            "round": self.map.round,
            "units": [[u.unit_id, u.kind, list(u.pos)] for u in self.map.units],
            "objectives": [
                [o.obj_id, list(o.pos), o.points, o.hidden, o.discovered, o.completed, o.dynamic]
                for o in self.map.objectives
            ],
            "valid_rounds": self.valid_command_rounds,
        }
        return sha256_hex(canonical_json(body).encode("utf-8"))

    def legal_action_schema(self) -> dict[str, Any]:
        return {
            "kind": "command_sheet",
            "form": "COMMAND: unit=<id> move_to=(x,y) | capture | scout",
            "units": [u.unit_id for u in self.map.units],
            "grid": self.map.grid,
        }
