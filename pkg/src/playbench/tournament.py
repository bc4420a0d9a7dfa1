"""AI-vs-AI tournament: seeded seat rotation over a pool of agents.

Each game seats four of the pool over a seeded balanced rotation of the
4-agent combinations (counts come out near-balanced, not exactly equal).
Matches are independent given their seeds, and a partial log resumes:
already-played game indices are skipped on rerun.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Optional

from . import rng as rngmod
from .agents.base import AgentConnector
from .envs.showdown import (
    MATCH_TICK_CAP,
    MatchResult,
    generate_arena,
    observation_for,
    parse_showdown_action,
    run_match,
    seat_rotation,
)
from .metrics import TournamentTable, tournament_table
from .render.prompts import SHOWDOWN_ACTIVE_TEMPLATE

MATCHES_FILE = "matches.jsonl"


def _connector_act_fn(agent: AgentConnector, seed: int):
    attached = {"done": False}

    def act(arena, pid: int) -> str:
        if not attached["done"]:
            agent.attach_seat(arena, pid, seed)
            attached["done"] = True
        bundle = observation_for(arena, pid)
        reply = agent.act(SHOWDOWN_ACTIVE_TEMPLATE.system_text, bundle, [])
        envelope = parse_showdown_action(reply)
        return envelope.payload["action"] if envelope.valid else "wait"

    return act


def play_game(agents: list[AgentConnector], seed: int, tick_cap: int = MATCH_TICK_CAP) -> MatchResult:
    """One match between exactly four connectors (seat i = player i)."""
    if len(agents) != 4:
        raise ValueError(f"a match seats exactly 4 agents, got {len(agents)}")
    arena = generate_arena(seed)
    result = run_match(arena, [_connector_act_fn(a, seed) for a in agents], tick_cap)
    result.agent_ids = [a.agent_id for a in agents]
    return result


def run_tournament(
    agents: list[AgentConnector],
    n_games: int = 50,
    seeds: Optional[list[int]] = None,
    rotation_seed: int = 0,
    out_dir: Optional[str | Path] = None,
    resume: bool = True,
    tick_cap: int = MATCH_TICK_CAP,
) -> tuple[list[MatchResult], TournamentTable]:
    """Run (or resume) the full protocol and aggregate the table."""
    if len(agents) < 4:
        raise ValueError(f"tournament needs at least 4 agents, got {len(agents)}")
    if seeds is None:
        seeds = [int(s) for s in rngmod.substream(rotation_seed, rngmod.TOURNAMENT).integers(0, 2**32, n_games)]
    combos = seat_rotation(len(agents), n_games, rotation_seed)

    done: dict[int, MatchResult] = {}
    matches_path = Path(out_dir) / MATCHES_FILE if out_dir is not None else None
    if matches_path is not None and resume and matches_path.exists():
        with open(matches_path, encoding="utf-8") as f:
            for line in f:
                if line.strip():
                    row = json.loads(line)
                    done[int(row["game_index"])] = MatchResult.from_dict(row["result"])

    results: list[MatchResult] = []
    for game_index in range(n_games):
        if game_index in done:
            results.append(done[game_index])
            continue
        combo = combos[game_index]
        seed = seeds[game_index % len(seeds)]
        # Seat order within the game is itself seeded.
        order = rngmod.substream(seed, f"{rngmod.TOURNAMENT}:seats").permutation(4)
        seated = [agents[combo[int(i)]] for i in order]
        result = play_game(seated, seed, tick_cap)
        results.append(result)
        if matches_path is not None:
            matches_path.parent.mkdir(parents=True, exist_ok=True)
            row: dict[str, Any] = {"game_index": game_index, "seed": seed, "result": result.to_dict()}
            with open(matches_path, "a", encoding="utf-8") as f:
                f.write(json.dumps(row, sort_keys=True) + "\n")
    return results, tournament_table(results)
