"""Run configuration: one JSON file drives a batch run."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .seeds import EPISODE_COUNTS, load_manifest, seeds_for
from .types import Difficulty, EnvDescriptor, GameId, default_step_cap


@dataclass
class RunConfig:
    game: GameId
    difficulty: Difficulty
    agent: dict[str, Any] = field(default_factory=lambda: {"type": "random"})
    intervention: Optional[dict[str, Any]] = None
    seeds: Optional[list[int]] = None  # None = frozen manifest
    seed_manifest_path: Optional[str] = None
    episodes: Optional[int] = None  # None = full manifest count
    step_cap: Optional[int] = None
    out_dir: str = "runs/out"
    concurrency: int = 1

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RunConfig":
        return cls(
            game=GameId(d["game"]),
            difficulty=Difficulty(d["difficulty"]),
            agent=dict(d.get("agent", {"type": "random"})),
            intervention=d.get("intervention"),
            seeds=list(d["seeds"]) if d.get("seeds") is not None else None,
            seed_manifest_path=d.get("seed_manifest_path"),
            episodes=d.get("episodes"),
            step_cap=d.get("step_cap"),
            out_dir=d.get("out_dir", "runs/out"),
            concurrency=int(d.get("concurrency", 1)),
        )

    def resolve_seeds(self) -> list[int]:
        if self.seeds is not None:
            pool = self.seeds
        else:
            manifest = load_manifest(self.seed_manifest_path)
            pool = seeds_for(self.game, manifest)
        count = self.episodes if self.episodes is not None else EPISODE_COUNTS[self.game]
        return pool[:count]

    def descriptors(self) -> list[EnvDescriptor]:
        cap = self.step_cap or default_step_cap(self.game, self.difficulty)
        return [
            EnvDescriptor(game_id=self.game, difficulty=self.difficulty, seed=s, step_cap=cap)
            for s in self.resolve_seeds()
        ]
