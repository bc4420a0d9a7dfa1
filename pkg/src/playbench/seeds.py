"""Frozen evaluation seed manifests.

Every agent (model, random, or human) plays the exact same pre-defined
scenario sequence per game, so procedural randomness never confounds the
comparison. The manifest file ships in-repo, generated once from a fixed
master seed and never regenerated.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from . import rng as rngmod
from .types import GameId

MANIFEST_VERSION = 1
MASTER_SEED = 20240521

EPISODE_COUNTS = {
    GameId.PATHFINDING: 50,
    GameId.ECHOES: 50,
    GameId.MELODY: 50,
    GameId.PHANTOM: 30,
    GameId.SHOWDOWN: 50,
}


def generate_manifest(master_seed: int = MASTER_SEED) -> dict:
    """Deterministic manifest construction (used once to freeze the file;
    kept so the freeze is auditable)."""
    manifest: dict = {"version": MANIFEST_VERSION, "master_seed": master_seed}
    for game, count in EPISODE_COUNTS.items():
        gen = rngmod.substream(master_seed, f"manifest:{game.value}")
        seeds: list[int] = []
        seen = set()
        while len(seeds) < count:
            candidate = int(gen.integers(0, 2**32))
            if candidate not in seen:
                seen.add(candidate)
                seeds.append(candidate)
        manifest[game.value] = seeds
    return manifest


def load_manifest(path: str | Path | None = None) -> dict:
    if path is not None:
        with open(path, encoding="utf-8") as f:
            manifest = json.load(f)
    else:
        text = resources.files("playbench.data").joinpath("seed_manifest.json").read_text()
        manifest = json.loads(text)
    if manifest.get("version") != MANIFEST_VERSION:
        raise ValueError(f"seed manifest version {manifest.get('version')} != {MANIFEST_VERSION}")
    return manifest


def seeds_for(game: GameId | str, manifest: dict | None = None) -> list[int]:
    manifest = manifest if manifest is not None else load_manifest()
    return list(manifest[GameId(game).value])
