"""Scoring: per-game aggregation, final scores, normalized performance,
tournament tables, and the human-baseline reliability check.

Aggregation is a pure function of the episode-log set: aborted episodes
are excluded from every mean and reported separately, and recomputing
from the same logs is bit-exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Sequence

from .envs.showdown import MatchResult
from .types import EpisodeRecord, GameId, Outcome


class MetricError(ValueError):
    pass


def trimmed_mean(values: Sequence[float]) -> float:
    """Mean after dropping exactly one maximum and one minimum occurrence."""
    if len(values) < 3:
        raise MetricError(f"trimmed mean needs at least 3 values, got {len(values)}")
    ordered = sorted(values)
    return sum(ordered[1:-1]) / (len(ordered) - 2)


def nps(model_score: float, human_score: float, random_score: float) -> float:
    """Normalized performance: 0 = random baseline, 100 = human expert."""
    spread = human_score - random_score
    if spread == 0:
        raise MetricError(
            f"degenerate baselines: human == random == {human_score!r}; NPS undefined"
        )
    return 100.0 * (model_score - random_score) / spread


def reliability(per_player_means: Sequence[float]) -> dict[str, Any]:
    """Inter-player agreement: population std over the five per-player
    mean scores, passing when below 8% of the mean."""
    if len(per_player_means) != 5:
        raise MetricError(f"reliability check requires 5 players, got {len(per_player_means)}")
    mean = sum(per_player_means) / 5.0
    std = math.sqrt(sum((v - mean) ** 2 for v in per_player_means) / 5.0)
    ratio = std / mean if mean != 0 else math.inf
    return {"std": std, "mean": mean, "ratio": ratio, "pass": ratio < 0.08}


@dataclass
class ScoreReport:
    game: GameId
    difficulty: str
    agent_id: str
    raw: dict[str, Any]
    final_score: Optional[float]
    n_episodes: int
    n_aborted: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "game": self.game.value,
            "difficulty": self.difficulty,
            "agent_id": self.agent_id,
            "raw": self.raw,
            "final_score": self.final_score,
            "n_episodes": self.n_episodes,
            "n_aborted": self.n_aborted,
        }


def _mean(values: list[float]) -> float:
    return sum(values) / len(values) if values else 0.0


def aggregate(records: Iterable[EpisodeRecord]) -> ScoreReport:
    """Fold one agent's episode records (one game, one difficulty) into the
    per-game raw metric map."""
    records = sorted(records, key=lambda r: (r.descriptor.seed, r.agent_id))
    if not records:
        raise MetricError("no records to aggregate")
    games = {r.descriptor.game_id for r in records}
    difficulties = {r.descriptor.difficulty for r in records}
    agents = {r.agent_id for r in records}
    if len(games) > 1 or len(difficulties) > 1:
        raise MetricError(f"mixed games/difficulties in one aggregation: {games}/{difficulties}")
    game = next(iter(games))
    usable = [r for r in records if r.outcome is not Outcome.ABORTED]
    n_aborted = len(records) - len(usable)
    raw = _aggregate_game(game, usable)
    return ScoreReport(
        game=game,
        difficulty=next(iter(difficulties)).value,
        agent_id=next(iter(agents)) if len(agents) == 1 else "mixed",
        raw=raw,
        final_score=game_final_score(game, raw) if usable else None,
        n_episodes=len(usable),
        n_aborted=n_aborted,
    )


def _aggregate_game(game: GameId, records: list[EpisodeRecord]) -> dict[str, Any]:
    if not records:
        return {}
    metrics = [r.raw_metrics for r in records]
    if game is GameId.PATHFINDING:
        steps = [float(m["steps"]) for m in metrics]
        raw = {
            "mean_steps": _mean(steps),
            "min_steps": min(steps),
            "max_steps": max(steps),
            "mean_invalid": _mean([float(m.get("invalid_actions", 0)) for m in metrics]),
            "success_rate": _mean([1.0 if m.get("goal_reached") else 0.0 for m in metrics]),
        }
        raw["trimmed_mean_steps"] = trimmed_mean(steps) if len(steps) >= 3 else raw["mean_steps"]
        return raw
    if game is GameId.ECHOES:
        parsed_ok = [m for m in metrics if not m.get("parse_failed")]
        simplified = [m for m in metrics if "simplified_score" in m]
        raw = {
            "success_rate_pct": 100.0 * _mean([1.0 if m.get("success") else 0.0 for m in metrics]),
            "mean_score": _mean([float(m.get("execution_score", 0)) for m in metrics]),
            # Parse failures contribute 0 to the accuracy means and are
            # reported through the failure rate instead.
            "mean_coord_acc": _mean(
                [float(m["coord_acc"]) if not m.get("parse_failed") else 0.0 for m in metrics]
            ),
            "mean_icon_acc": _mean(
                [float(m["icon_acc"]) if not m.get("parse_failed") else 0.0 for m in metrics]
            ),
            "parse_failure_pct": 100.0 * (1.0 - len(parsed_ok) / len(metrics)),
        }
        if simplified:
            raw["mean_simplified_score"] = _mean([float(m["simplified_score"]) for m in simplified])
        return raw
    if game is GameId.MELODY:
        return {
            "completion_rate_pct": 100.0 * _mean([1.0 if m.get("completed") else 0.0 for m in metrics]),
            "mean_composite_score": _mean([float(m.get("composite_score", 0.0)) for m in metrics]),
        }
    if game is GameId.PHANTOM:
        return {
            "mean_success_rate": _mean([float(m.get("success_rate", 0.0)) for m in metrics]),
            "mean_normalized_score": _mean([float(m.get("normalized_score", 0.0)) for m in metrics]),
            "mean_rounds": _mean([float(m.get("rounds_used", 0.0)) for m in metrics]),
        }
    if game is GameId.SHOWDOWN:
        return {
            "win_rate_pct": 100.0 * _mean([1.0 if m.get("won") else 0.0 for m in metrics]),
            "mean_kills": _mean([float(m.get("kills", 0)) for m in metrics]),
            "mean_deaths": _mean([float(m.get("death", 0)) for m in metrics]),
        }
    raise MetricError(f"unknown game: {game}")


def game_final_score(game: GameId, raw: dict[str, Any]) -> float:
    """Single scalar per game feeding the normalized-performance formula.

    pathfinding: reciprocal of the trimmed mean step count (fewer steps is
    better; the reciprocal keeps orientation so random sits near zero).
    echoes: 50% execution score + 25% coordinate + 25% icon accuracy.
    melody: the composite score. phantom: 50% success rate (scaled to
    0-100) + 50% normalized score.
    """
    try:
        if game is GameId.PATHFINDING:
            return 1.0 / float(raw["trimmed_mean_steps"])
        if game is GameId.ECHOES:
            return (
                0.5 * float(raw["mean_score"])
                + 0.25 * float(raw["mean_coord_acc"])
                + 0.25 * float(raw["mean_icon_acc"])
            )
        if game is GameId.MELODY:
            return float(raw["mean_composite_score"])
        if game is GameId.PHANTOM:
            return 0.5 * (float(raw["mean_success_rate"]) * 100.0) + 0.5 * float(
                raw["mean_normalized_score"]
            )
    except KeyError as exc:
        raise MetricError(f"missing raw field for {game.value} final score: {exc}") from exc
    raise MetricError(f"no final score defined for {game.value} (tournament game)")


def echoes_final_from_values(mean_score: float, coord: float, icon: float) -> float:
    return 0.5 * mean_score + 0.25 * coord + 0.25 * icon


# ---------------------------------------------------------------------------
# Tournament aggregation
# ---------------------------------------------------------------------------

@dataclass
class TournamentRow:
    agent_id: str
    games: int
    wins: int
    win_rate_pct: float
    kills: int
    deaths: int
    kd_ratio: float
    kd_flagged: bool = False  # deaths = 0: ratio column reports raw kills


@dataclass
class TournamentTable:
    rows: list[TournamentRow] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "rows": [
                {
                    "agent_id": r.agent_id,
                    "games": r.games,
                    "wins": r.wins,
                    "win_rate_pct": r.win_rate_pct,
                    "kills": r.kills,
                    "deaths": r.deaths,
                    "kd_ratio": r.kd_ratio,
                    "kd_flagged": r.kd_flagged,
                }
                for r in self.rows
            ]
        }


def tournament_table(results: Iterable[MatchResult]) -> TournamentTable:
    """Per-agent aggregates over a set of match results. Win rate and K/D
    are rounded to 2 decimals; an undefeated agent's K/D column carries
    its kill count, flagged."""
    stats: dict[str, dict[str, int]] = {}
    for match in results:
        for seat, agent_id in enumerate(match.agent_ids):
            entry = stats.setdefault(agent_id, {"games": 0, "wins": 0, "kills": 0, "deaths": 0})
            entry["games"] += 1
            entry["kills"] += match.kills[seat]
            entry["deaths"] += match.deaths[seat]
            if match.winner == seat:
                entry["wins"] += 1
    rows = []
    for agent_id, entry in stats.items():
        win_rate = round(100.0 * entry["wins"] / entry["games"], 2) if entry["games"] else 0.0
        if entry["deaths"] > 0:
            kd, flagged = round(entry["kills"] / entry["deaths"], 2), False
        else:
            kd, flagged = float(entry["kills"]), True
        rows.append(
            TournamentRow(
                agent_id=agent_id,
                games=entry["games"],
                wins=entry["wins"],
                win_rate_pct=win_rate,
                kills=entry["kills"],
                deaths=entry["deaths"],
                kd_ratio=kd,
                kd_flagged=flagged,
            )
        )
    rows.sort(key=lambda r: (-r.win_rate_pct, r.agent_id))
    return TournamentTable(rows=rows)


# ---------------------------------------------------------------------------
# Report emitters
# ---------------------------------------------------------------------------

def format_report_table(reports: Sequence[ScoreReport]) -> str:
    """Aligned text table, one row per (agent, game, difficulty) report."""
    headers = ["agent", "game", "difficulty", "final_score", "episodes", "aborted"]
    rows = [
        [
            r.agent_id,
            r.game.value,
            r.difficulty,
            "-" if r.final_score is None else f"{r.final_score:.4f}",
            str(r.n_episodes),
            str(r.n_aborted),
        ]
        for r in reports
    ]
    return _align([headers] + rows)


# Per-game diagnostic columns, in the published layout order.
GAME_COLUMNS: dict[GameId, list[tuple[str, str]]] = {
    GameId.PATHFINDING: [
        ("mean_steps", "Mean Steps"), ("min_steps", "Min"), ("max_steps", "Max"),
        ("mean_invalid", "Invalid"), ("trimmed_mean_steps", "Trimmed"),
    ],
    GameId.ECHOES: [
        ("success_rate_pct", "Succ.(%)"), ("mean_score", "M.Score"),
        ("mean_coord_acc", "Coord."), ("mean_icon_acc", "Icon"),
        ("parse_failure_pct", "ParseF(%)"),
    ],
    GameId.MELODY: [
        ("mean_composite_score", "Score"), ("completion_rate_pct", "Completion(%)"),
    ],
    GameId.PHANTOM: [
        ("mean_normalized_score", "Score"), ("mean_success_rate", "Succ. Rate"),
    ],
}


def format_game_table(reports: Sequence[ScoreReport]) -> str:
    """Aligned diagnostic table for one game's reports, mirroring that
    game's published column layout. Showdown reports use the tournament
    table instead."""
    games = {r.game for r in reports}
    if len(games) != 1:
        raise MetricError(f"one game per diagnostic table, got {sorted(g.value for g in games)}")
    game = next(iter(games))
    columns = GAME_COLUMNS.get(game)
    if columns is None:
        raise MetricError(f"{game.value} has no diagnostic table (use the tournament table)")
    headers = ["agent", "difficulty"] + [title for _, title in columns]
    rows = []
    for r in reports:
        cells = [r.agent_id, r.difficulty]
        for key, _ in columns:
            value = r.raw.get(key)
            cells.append("-" if value is None else f"{float(value):.4g}")
        rows.append(cells)
    return _align([headers] + rows)


def format_tournament_table(table: TournamentTable) -> str:
    headers = ["agent", "games", "wins", "win_rate_%", "kills", "deaths", "k/d"]
    rows = []
    for r in table.rows:
        kd = f"{r.kd_ratio:.2f}" + ("*" if r.kd_flagged else "")
        rows.append([r.agent_id, str(r.games), str(r.wins), f"{r.win_rate_pct:.2f}",
                     str(r.kills), str(r.deaths), kd])
    note = "\n* undefeated: column reports raw kills" if any(r.kd_flagged for r in table.rows) else ""
    return _align([headers] + rows) + note


def _align(rows: list[list[str]]) -> str:
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip() for row in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)
