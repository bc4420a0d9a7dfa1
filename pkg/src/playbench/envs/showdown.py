"""Four-player bomb arena with sound cues and the AI-vs-AI tournament.

The arena is a classic pillared grid: solid border, solid pillars on even
coordinates, seeded destructible crates elsewhere (spawn corners cleared).
All four players act simultaneously each tick: moves resolve first (with
mutual blocking), then bomb placement, then fuses, detonations and chain
reactions. A player's frame only shows the arena near them; bomb and
explosion sound cues are how off-screen threats reach the agent.

In the single-agent episode contract the three other seats are filled by
seeded built-in survivor bots (opponent policy is environment dynamics).
The tournament protocol seats four external connectors per game over a
seeded rotation of the six-agent pool.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from .. import rng as rngmod
from ..engine import Environment
from ..render import frames
from ..render.prompts import SHOWDOWN_ACTIVE_TEMPLATE, SHOWDOWN_OBSERVER_TEMPLATE, assemble_prompt
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

GRID = 13
EMPTY, DESTRUCTIBLE, SOLID = 0, 1, 2
FUSE_TICKS = 8
INITIAL_RANGE = 2
POWERUP_CHANCE = 0.3
VIEW_RADIUS = 4
MATCH_TICK_CAP = 500

ACTIONS = ("move_north", "move_south", "move_east", "move_west", "place_bomb", "wait")
_MOVES = {"move_north": (0, -1), "move_south": (0, 1), "move_east": (1, 0), "move_west": (-1, 0)}
_SPAWNS = [(1, 1), (GRID - 2, 1), (1, GRID - 2), (GRID - 2, GRID - 2)]


@dataclass(eq=False)
class Bomb:
    owner: int
    pos: tuple[int, int]
    fuse: int
    blast_range: int


@dataclass
class PlayerState:
    pid: int
    pos: tuple[int, int]
    alive: bool = True
    bombs_available: int = 1
    blast_range: int = INITIAL_RANGE
    death_tick: Optional[int] = None
    kills: int = 0


@dataclass
class Arena:
    cells: np.ndarray  # int8 (GRID, GRID), indexed [y, x]
    players: list[PlayerState]
    bombs: list[Bomb] = field(default_factory=list)
    powerups: set = field(default_factory=set)
    tick: int = 0
    cue_log: list[tuple[str, tuple[int, int], int]] = field(default_factory=list)
    last_blasts: list[tuple[int, int]] = field(default_factory=list)
    _events_rng: Optional[np.random.Generator] = field(default=None, repr=False)

    def alive_players(self) -> list[PlayerState]:
        return [p for p in self.players if p.alive]


@dataclass
class MatchResult:
    """Per-seat outcome of one match (seat order = player ids 0..3)."""

    agent_ids: list[str]
    kills: list[int]
    deaths: list[int]
    placements: list[int]
    winner: Optional[int]
    ticks: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "agent_ids": self.agent_ids,
            "kills": self.kills,
            "deaths": self.deaths,
            "placements": self.placements,
            "winner": self.winner,
            "ticks": self.ticks,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "MatchResult":
        return cls(
            agent_ids=list(d["agent_ids"]),
            kills=list(d["kills"]),
            deaths=list(d["deaths"]),
            placements=list(d["placements"]),
            winner=d["winner"],
            ticks=int(d["ticks"]),
        )


def generate_arena(seed: int) -> Arena:
    gen = rngmod.substream(seed, rngmod.LAYOUT)
    cells = np.zeros((GRID, GRID), dtype=np.int8)
    cells[0, :] = cells[-1, :] = SOLID
    cells[:, 0] = cells[:, -1] = SOLID
    for y in range(2, GRID - 1, 2):
        for x in range(2, GRID - 1, 2):
            cells[y, x] = SOLID
    for y in range(1, GRID - 1):
        for x in range(1, GRID - 1):
            if cells[y, x] == EMPTY and gen.random() < 0.45:
                cells[y, x] = DESTRUCTIBLE
    # Clear spawn pockets so every player can make an opening move.
    for sx, sy in _SPAWNS:
        for dx, dy in ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)):
            x, y = sx + dx, sy + dy
            if 0 < x < GRID - 1 and 0 < y < GRID - 1 and cells[y, x] == DESTRUCTIBLE:
                cells[y, x] = EMPTY
    players = [PlayerState(pid=i, pos=_SPAWNS[i]) for i in range(4)]
    return Arena(cells=cells, players=players, _events_rng=rngmod.substream(seed, rngmod.EVENTS))


def blast_cells(arena: Arena, bomb: Bomb) -> list[tuple[int, int]]:
    """Cross-shaped blast footprint: stopped by solids, includes (and would
    destroy) the first destructible per ray, passes through bombs."""
    cells = [bomb.pos]
    for dx, dy in _MOVES.values():
        for dist in range(1, bomb.blast_range + 1):
            x, y = bomb.pos[0] + dx * dist, bomb.pos[1] + dy * dist
            if not (0 <= x < GRID and 0 <= y < GRID) or arena.cells[y, x] == SOLID:
                break
            cells.append((x, y))
            if arena.cells[y, x] == DESTRUCTIBLE:
                break
    return cells


def showdown_tick(arena: Arena, actions: dict[int, str]) -> list[str]:
    """Resolve one simultaneous tick. `actions` maps player id to one of
    ACTIONS; missing/dead players wait. Returns event notes."""
    notes: list[str] = []
    arena.last_blasts = []
    alive = {p.pid: p for p in arena.alive_players()}
    bomb_cells = {b.pos for b in arena.bombs}

    # --- movement (simultaneous, mutually blocking) ---
    targets: dict[int, tuple[int, int]] = {}
    for pid, player in alive.items():
        action = actions.get(pid, "wait")
        delta = _MOVES.get(action)
        if delta is None:
            targets[pid] = player.pos
            continue
        tx, ty = player.pos[0] + delta[0], player.pos[1] + delta[1]
        blocked = (
            not (0 <= tx < GRID and 0 <= ty < GRID)
            or arena.cells[ty, tx] != EMPTY
            or (tx, ty) in bomb_cells
        )
        targets[pid] = player.pos if blocked else (tx, ty)

    changed = True
    while changed:
        changed = False
        for pid, target in list(targets.items()):
            if target == alive[pid].pos:
                continue
            # Same-target collision: everyone aiming there stays put.
            rivals = [q for q, t in targets.items() if q != pid and t == target]
            if rivals:
                for q in rivals + [pid]:
                    if targets[q] != alive[q].pos:
                        targets[q] = alive[q].pos
                        changed = True
                continue
            # Occupied by a player who is not vacating (or swapping with us).
            for q, other in alive.items():
                if q != pid and other.pos == target and targets[q] in (other.pos, alive[pid].pos):
                    targets[pid] = alive[pid].pos
                    changed = True
                    break
    for pid, target in targets.items():
        alive[pid].pos = target

    # --- powerup pickup ---
    for player in alive.values():
        if player.pos in arena.powerups:
            arena.powerups.discard(player.pos)
            player.blast_range += 1
            notes.append(f"p{player.pid} picked up blast-range powerup")

    # --- bomb placement ---
    for pid, player in alive.items():
        if actions.get(pid) == "place_bomb":
            if player.bombs_available > 0 and player.pos not in {b.pos for b in arena.bombs}:
                arena.bombs.append(
                    Bomb(owner=pid, pos=player.pos, fuse=FUSE_TICKS, blast_range=player.blast_range)
                )
                player.bombs_available -= 1
                arena.cue_log.append(("bomb_placed", player.pos, arena.tick))
                notes.append(f"p{pid} placed a bomb at {player.pos}")

    # --- fuses, detonations, chains ---
    for bomb in arena.bombs:
        bomb.fuse -= 1
    detonating = [b for b in arena.bombs if b.fuse <= 0]
    exploded: list[Bomb] = []
    owner_of_cell: dict[tuple[int, int], int] = {}
    destroyed: set[tuple[int, int]] = set()
    queue = list(detonating)
    while queue:
        bomb = queue.pop(0)
        if bomb in exploded:
            continue
        exploded.append(bomb)
        arena.cue_log.append(("explosion", bomb.pos, arena.tick))
        for cell in blast_cells(arena, bomb):
            owner_of_cell.setdefault(cell, bomb.owner)
            if arena.cells[cell[1], cell[0]] == DESTRUCTIBLE:
                destroyed.add(cell)
            for other in arena.bombs:
                if other not in exploded and other.pos == cell:
                    queue.append(other)

    if exploded:
        arena.last_blasts = sorted(owner_of_cell.keys())
        for bomb in exploded:
            arena.bombs.remove(bomb)
            owner = next((p for p in arena.players if p.pid == bomb.owner), None)
            if owner is not None:
                owner.bombs_available += 1
        for player in list(alive.values()):
            if player.pos in owner_of_cell:
                player.alive = False
                player.death_tick = arena.tick
                killer = owner_of_cell[player.pos]
                if killer != player.pid:
                    arena.players[killer].kills += 1
                    notes.append(f"p{player.pid} eliminated by p{killer}")
                else:
                    notes.append(f"p{player.pid} eliminated by own bomb")
        # Blasts consume exposed powerups; crates destroyed this tick may
        # reveal fresh ones afterwards.
        arena.powerups = {c for c in arena.powerups if c not in owner_of_cell}
        for cell in sorted(destroyed):
            arena.cells[cell[1], cell[0]] = EMPTY
            if float(arena._events_rng.random()) < POWERUP_CHANCE:
                arena.powerups.add(cell)
                arena.cue_log.append(("powerup", cell, arena.tick))
                notes.append(f"powerup revealed at {cell}")

    arena.tick += 1
    return notes


def match_over(arena: Arena) -> bool:
    return len(arena.alive_players()) <= 1


def compute_placements(arena: Arena) -> list[int]:
    """1 = best. Survivors share first; earlier deaths place worse; equal
    death ticks share a placement."""
    def sort_key(p: PlayerState):
        return (0, 0) if p.alive else (1, -(p.death_tick if p.death_tick is not None else -1))

    ordered = sorted(arena.players, key=lambda p: (sort_key(p), p.pid))
    placements = [0] * len(arena.players)
    rank = 0
    prev_key = None
    for i, player in enumerate(ordered):
        key = sort_key(player)
        if key != prev_key:
            rank = i + 1
            prev_key = key
        placements[player.pid] = rank
    return placements


# ---------------------------------------------------------------------------
# Built-in survivor policy (bots for single-agent mode; oracle connector)
# ---------------------------------------------------------------------------

def danger_cells(arena: Arena) -> set:
    out = set()
    for bomb in arena.bombs:
        out.update(blast_cells(arena, bomb))
    return out


def _walkable(arena: Arena, cell: tuple[int, int], occupied: set) -> bool:
    x, y = cell
    return (
        0 <= x < GRID and 0 <= y < GRID
        and arena.cells[y, x] == EMPTY
        and cell not in {b.pos for b in arena.bombs}
        and cell not in occupied
    )


def survivor_policy(arena: Arena, pid: int, gen: np.random.Generator) -> str:
    """Evasion-first hunter: flee predicted blasts above all; otherwise
    bomb when an enemy is in blast line or a crate blocks the way (and an
    escape square exists), otherwise advance on the nearest enemy."""
    from collections import deque

    me = next(p for p in arena.players if p.pid == pid)
    if not me.alive:
        return "wait"
    occupied = {p.pos for p in arena.alive_players() if p.pid != pid}
    danger = danger_cells(arena)

    def neighbors(cell):
        for name, (dx, dy) in _MOVES.items():
            yield name, (cell[0] + dx, cell[1] + dy)

    if me.pos in danger:
        queue = deque([(me.pos, None)])
        seen = {me.pos}
        while queue:
            cell, first = queue.popleft()
            if cell not in danger and first is not None:
                return first
            for name, nxt in neighbors(cell):
                if nxt not in seen and _walkable(arena, nxt, occupied):
                    seen.add(nxt)
                    queue.append((nxt, first or name))
        return "wait"

    enemies = [p for p in arena.alive_players() if p.pid != pid]

    def in_blast_line(target) -> bool:
        dx, dy = target[0] - me.pos[0], target[1] - me.pos[1]
        if dx != 0 and dy != 0:
            return False
        dist = abs(dx) + abs(dy)
        if dist > me.blast_range:
            return False
        step = (np.sign(dx), np.sign(dy))
        for i in range(1, dist + 1):
            cell = (me.pos[0] + step[0] * i, me.pos[1] + step[1] * i)
            if arena.cells[cell[1], cell[0]] != EMPTY:
                return False
        return True

    adjacent_crate = any(
        arena.cells[me.pos[1] + dy, me.pos[0] + dx] == DESTRUCTIBLE
        for dx, dy in _MOVES.values()
        if 0 <= me.pos[0] + dx < GRID and 0 <= me.pos[1] + dy < GRID
    )
    should_bomb = adjacent_crate or any(in_blast_line(e.pos) for e in enemies)
    if me.bombs_available > 0 and should_bomb:
        hypothetical = Bomb(owner=pid, pos=me.pos, fuse=FUSE_TICKS, blast_range=me.blast_range)
        new_danger = danger | set(blast_cells(arena, hypothetical))
        escape = [
            name for name, nxt in neighbors(me.pos)
            if _walkable(arena, nxt, occupied) and nxt not in new_danger
        ]
        if escape:
            return "place_bomb"

    # Advance on the nearest enemy through open squares, never stepping
    # into a predicted blast.
    if enemies:
        goals = {e.pos for e in enemies}
        queue = deque([(me.pos, None)])
        seen = {me.pos}
        while queue:
            cell, first = queue.popleft()
            if any(abs(cell[0] - g[0]) + abs(cell[1] - g[1]) <= 1 for g in goals) and first is not None:
                return first
            for name, nxt in neighbors(cell):
                if nxt in seen or nxt in danger or not _walkable(arena, nxt, occupied):
                    continue
                seen.add(nxt)
                queue.append((nxt, first or name))

    safe_moves = [
        name for name, nxt in neighbors(me.pos)
        if _walkable(arena, nxt, occupied) and nxt not in danger
    ]
    if safe_moves:
        return str(safe_moves[int(gen.integers(len(safe_moves)))])
    return "wait"


# ---------------------------------------------------------------------------
# Environment (single external agent vs three seeded bots)
# ---------------------------------------------------------------------------

def local_frame(arena: Arena, pid: int) -> np.ndarray:
    """Player-centric view: cells beyond the view radius render as dark
    fog; sound cues are the only signal about that space."""
    me = arena.players[pid]
    cells = arena.cells.copy()
    mask_y, mask_x = np.mgrid[0:GRID, 0:GRID]
    far = np.maximum(np.abs(mask_x - me.pos[0]), np.abs(mask_y - me.pos[1])) > VIEW_RADIUS
    cells[far] = SOLID

    def visible(cell):
        return max(abs(cell[0] - me.pos[0]), abs(cell[1] - me.pos[1])) <= VIEW_RADIUS

    return frames.render_arena(
        cells,
        [(p.pid, p.pos, p.alive and visible(p.pos)) for p in arena.players],
        [(b.pos, b.fuse) for b in arena.bombs if visible(b.pos)],
        [c for c in arena.last_blasts if visible(c)],
        [c for c in arena.powerups if visible(c)],
    )


def player_status_text(arena: Arena) -> str:
    lines = [f"TICK: {arena.tick}", "PLAYERS:"]
    for p in arena.players:
        status = "alive" if p.alive else "dead"
        lines.append(
            f"  p{p.pid} pos=({p.pos[0]},{p.pos[1]}) {status} bombs={p.bombs_available} range={p.blast_range}"
        )
    return "\n".join(lines)


def observation_for(arena: Arena, pid: int) -> ObservationBundle:
    """One player's multimodal observation of the current tick."""
    cues = [c for c in arena.cue_log if c[2] >= arena.tick - 1]
    audio = None
    if cues:
        base_tick = cues[0][2]
        events = [
            (cue_id, (tick - base_tick) * 150 + i * 40)
            for i, (cue_id, _pos, tick) in enumerate(cues)
        ]
        audio = AudioPayload(kind=AudioKind.CUES, cue_events=events)
    me = arena.players[pid]
    template = SHOWDOWN_ACTIVE_TEMPLATE if me.alive else SHOWDOWN_OBSERVER_TEMPLATE
    text = assemble_prompt(
        template.turn_skeleton,
        {
            "channel_inventory": "image, audio, text" if audio else "image, text",
            "player_id": str(pid),
            "state_description": player_status_text(arena),
            "cue_summary": f"{len(cues)} event(s) in the audio channel" if cues else "none",
        },
    )
    return ObservationBundle(text=text, frame=local_frame(arena, pid), audio=audio)


class ShowdownEnv(Environment):
    PLAYER_ID = 0

    def reset(self) -> None:
        self.arena = generate_arena(self.descriptor.seed)
        self._bot_rngs = {
            pid: rngmod.substream(self.descriptor.seed, f"{rngmod.OPPONENTS}:{pid}")
            for pid in (1, 2, 3)
        }

    def system_prompt(self) -> str:
        return SHOWDOWN_ACTIVE_TEMPLATE.system_text

    def observe(self) -> ObservationBundle:
        return observation_for(self.arena, self.PLAYER_ID)

    def parse_action(self, raw_text: str) -> ActionEnvelope:
        return parse_showdown_action(raw_text)

    def apply(self, envelope: ActionEnvelope) -> str:
        if not envelope.valid:
            # Unparseable reply: the tick does not advance (contrast with a
            # parse-valid but blocked move, which resolves as wait).
            return "invalid action: no-op"
        actions = {self.PLAYER_ID: envelope.payload["action"]}
        for pid, gen in self._bot_rngs.items():
            if self.arena.players[pid].alive:
                actions[pid] = survivor_policy(self.arena, pid, gen)
        notes = showdown_tick(self.arena, actions)
        return "; ".join(notes) if notes else "tick resolved"

    def episode_over(self) -> Optional[Outcome]:
        me = self.arena.players[self.PLAYER_ID]
        if not me.alive:
            return Outcome.ELIMINATED
        if match_over(self.arena):
            return Outcome.GOAL_REACHED  # last one standing
        return None

    def raw_metrics(self) -> dict[str, Any]:
        me = self.arena.players[self.PLAYER_ID]
        return {
            "ticks": self.arena.tick,
            "kills": me.kills,
            "death": 0 if me.alive else 1,
            "won": me.alive and match_over(self.arena),
        }

    def state_digest(self) -> str:
        body = {
            "cells": sha256_hex(self.arena.cells.tobytes()),
            "tick": self.arena.tick,
            "players": [
                [p.pid, list(p.pos), p.alive, p.bombs_available, p.blast_range, p.death_tick, p.kills]
                for p in self.arena.players
            ],
            "bombs": [[b.owner, list(b.pos), b.fuse, b.blast_range] for b in self.arena.bombs],
            "powerups": sorted(list(c) for c in self.arena.powerups),
        }
        return sha256_hex(canonical_json(body).encode("utf-8"))

    def legal_action_schema(self) -> dict[str, Any]:
        return {"kind": "choice", "form": "ACTION: <choice>", "choices": list(ACTIONS)}


def parse_showdown_action(raw_text: str) -> ActionEnvelope:
    import re

    matches = re.findall(r"action\s*:\s*([a-z_]+)", (raw_text or ""), re.IGNORECASE)
    for token in reversed(matches):
        name = token.lower()
        if name in ACTIONS:
            return ActionEnvelope(
                game_id=GameId.SHOWDOWN, payload={"action": name}, raw_text=raw_text, valid=True
            )
    return ActionEnvelope(
        game_id=GameId.SHOWDOWN, payload={"action": "wait"}, raw_text=raw_text, valid=False
    )


# ---------------------------------------------------------------------------
# Tournament protocol
# ---------------------------------------------------------------------------

def seat_rotation(n_agents: int, n_games: int, seed: int) -> list[tuple[int, ...]]:
    """Seeded balanced rotation over all 4-agent combinations. Counts come
    out near-balanced but not exactly equal once n_games stops dividing
    the combination count evenly."""
    combos = list(itertools.combinations(range(n_agents), 4))
    gen = rngmod.substream(seed, rngmod.TOURNAMENT)
    order: list[tuple[int, ...]] = []
    while len(order) < n_games:
        batch = [combos[int(i)] for i in gen.permutation(len(combos))]
        order.extend(batch)
    return order[:n_games]


def run_match(
    arena: Arena,
    act_fns: list[Callable[[Arena, int], str]],
    tick_cap: int = MATCH_TICK_CAP,
) -> MatchResult:
    """Drive one match to completion. `act_fns[i]` produces player i's
    action each tick; a raising act_fn idles (waits) from then on."""
    failed = [False] * 4
    while not match_over(arena) and arena.tick < tick_cap:
        actions: dict[int, str] = {}
        for pid in range(4):
            if not arena.players[pid].alive or failed[pid]:
                continue
            try:
                actions[pid] = act_fns[pid](arena, pid)
            except Exception:
                failed[pid] = True
                actions[pid] = "wait"
        showdown_tick(arena, actions)
    survivors = arena.alive_players()
    winner = survivors[0].pid if len(survivors) == 1 else None
    return MatchResult(
        agent_ids=["" for _ in range(4)],
        kills=[p.kills for p in arena.players],
        deaths=[0 if p.alive else 1 for p in arena.players],
        placements=compute_placements(arena),
        winner=winner,
        ticks=arena.tick,
    )
