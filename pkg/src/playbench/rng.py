"""Seeded random streams.

Every source of randomness in the platform flows through a named substream
derived from (seed, name). Substreams are independent counter-based Philox
generators, so consuming one stream (e.g. "intervention" noise) can never
shift another (e.g. "layout"). That isolation is what lets a diagnostic
intervention be toggled without perturbing the generated world.
"""

from __future__ import annotations

import hashlib

import numpy as np

# Canonical substream names used across the platform.
LAYOUT = "layout"
GUIDANCE = "guidance"
NOISE = "noise"
INTERVENTION = "intervention"
OPPONENTS = "opponents"
EVENTS = "events"
AGENT = "agent"
TOURNAMENT = "tournament"


def stream_key(seed: int, name: str) -> int:
    """128-bit Philox key for a (seed, name) pair."""
    digest = hashlib.sha256(f"{seed}:{name}".encode("utf-8")).digest()
    return int.from_bytes(digest[:16], "little")


def substream(seed: int, name: str) -> np.random.Generator:
    """Fresh generator for the named substream of `seed`.

    Calling this twice with the same arguments yields generators that
    produce identical output sequences.
    """
    return np.random.Generator(np.random.Philox(key=stream_key(seed, name)))
