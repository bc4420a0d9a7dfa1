"""Diagnostic interventions: pure observation/prompt transforms.

Each intervention rewrites what the agent sees for one episode; world
state, transitions, and scoring are never touched (the Simplified variant
additionally flips the echoes phase-structure flag, which the environment
reads at reset). Seeded transforms (noise) draw from the episode's
"intervention" substream, one fresh generator per application, so reruns
and replays are byte-identical and the layout stream is never perturbed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Optional

import numpy as np

from . import rng as rngmod
from .render.prompts import MINIMAL_TURN_PROMPT
from .types import AudioKind, AudioPayload, GameId, ObservationBundle, VideoPayload

if TYPE_CHECKING:
    from .engine import Environment

KINDS = ("conflict", "ablation", "noise", "aided_prompt", "simplified", "substitution")

# Which games each manipulation applies to.
APPLICABILITY: dict[str, set[GameId]] = {
    "conflict": {GameId.PATHFINDING},
    "ablation": {GameId.PATHFINDING, GameId.ECHOES},
    "noise": {GameId.PHANTOM},
    "aided_prompt": {GameId.ECHOES, GameId.MELODY},
    "simplified": {GameId.ECHOES},
    "substitution": {GameId.PHANTOM},
}

NOISE_LEXICON_WORDS = (
    "zap", "chirp", "blort", "frizz", "quop", "snee", "vlim", "drax", "plin", "zorp",
)
NOISE_LEXICON_LETTERS = ("w", "b")
DEFAULT_WORD_RATE = 0.15
DEFAULT_LETTER_RATE = 0.10
DEFAULT_GAUSSIAN_SIGMA = 20.0  # uint8 scale, i.e. 20/255
DEFAULT_SALT_PEPPER_P = 0.05
DEFAULT_BLUR_KERNEL = 3


class InterventionError(ValueError):
    pass


@dataclass
class InterventionConfig:
    """Tagged description of one manipulation, recorded verbatim in the
    episode log."""

    kind: str
    channel: Optional[str] = None  # conflict: "audio" | "text"
    removed: Optional[str] = None  # ablation: "audio" | "image" | "text"
    target: Optional[str] = None   # noise: "audio" | "image"
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise InterventionError(f"unknown intervention kind: {self.kind!r}")
        if self.kind == "conflict" and self.channel not in ("audio", "text"):
            raise InterventionError("conflict requires channel in {audio, text}")
        if self.kind == "ablation" and self.removed not in ("audio", "image", "text"):
            raise InterventionError("ablation requires removed in {audio, image, text}")
        if self.kind == "noise" and self.target not in ("audio", "image"):
            raise InterventionError("noise requires target in {audio, image}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "channel": self.channel,
            "removed": self.removed,
            "target": self.target,
            "params": self.params,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "InterventionConfig":
        return cls(
            kind=d["kind"],
            channel=d.get("channel"),
            removed=d.get("removed"),
            target=d.get("target"),
            params=dict(d.get("params") or {}),
        )


def validate_applicability(config: InterventionConfig, game_id: GameId) -> None:
    if game_id not in APPLICABILITY[config.kind]:
        allowed = ", ".join(sorted(g.value for g in APPLICABILITY[config.kind]))
        raise InterventionError(
            f"intervention {config.kind!r} does not apply to {game_id.value} (allowed: {allowed})"
        )


# ---------------------------------------------------------------------------
# Conflict (pathfinding)
# ---------------------------------------------------------------------------

_OPPOSITE_BEARING = {
    "ahead": "behind", "behind": "ahead",
    "left": "right", "right": "left",
    "ahead-left": "behind-right", "behind-right": "ahead-left",
    "ahead-right": "behind-left", "behind-left": "ahead-right",
}


def flip_direction_words(sentence: str) -> str:
    """left<->right swap plus forward<->turn-around reversal."""
    out = sentence.replace("left", "\x00").replace("right", "left").replace("\x00", "right")
    if "turn around, then move forward" in out:
        return out.replace("turn around, then move forward", "move forward")
    return out.replace("move forward", "turn around, then move forward")


def apply_conflict(bundle: ObservationBundle, channel: str) -> ObservationBundle:
    if channel == "audio":
        if bundle.audio is None or bundle.audio.transcript is None:
            return bundle
        flipped = flip_direction_words(bundle.audio.transcript)
        audio = AudioPayload(kind=AudioKind.TRANSCRIPT, transcript=flipped)
        return ObservationBundle(
            text=bundle.text, frame=bundle.frame, video=bundle.video, audio=audio
        )
    if bundle.text is None:
        return bundle

    def invert_heading(match: re.Match) -> str:
        heading = float(match.group(1))
        return f"HEADING: {(heading + 180.0) % 360.0!r}"

    def invert_bearing(match: re.Match) -> str:
        return f"TARGET_BEARING: {_OPPOSITE_BEARING.get(match.group(1), match.group(1))}"

    text = re.sub(r"HEADING: ([0-9.]+)", invert_heading, bundle.text)
    text = re.sub(r"TARGET_BEARING: ([a-z-]+)", invert_bearing, text)
    return ObservationBundle(text=text, frame=bundle.frame, video=bundle.video, audio=bundle.audio)


# ---------------------------------------------------------------------------
# Ablation (pathfinding, echoes)
# ---------------------------------------------------------------------------

_INVENTORY_RE = re.compile(r"AVAILABLE INPUTS: [^\n]*")


def apply_ablation(bundle: ObservationBundle, removed: str) -> ObservationBundle:
    frame, video, audio, text = bundle.frame, bundle.video, bundle.audio, bundle.text
    if removed == "audio":
        audio = None
    elif removed == "image":
        frame, video = None, None
    elif removed == "text":
        text = MINIMAL_TURN_PROMPT
    if text is not None and removed != "text":
        remaining = []
        if frame is not None:
            remaining.append("image")
        if video is not None:
            remaining.append("video")
        if audio is not None:
            remaining.append("audio")
        remaining.append("text")
        text = _INVENTORY_RE.sub("AVAILABLE INPUTS: " + ", ".join(remaining), text)
    return ObservationBundle(text=text, frame=frame, video=video, audio=audio)


# ---------------------------------------------------------------------------
# Noise (phantom)
# ---------------------------------------------------------------------------

def apply_audio_noise(
    transcript: str,
    gen: np.random.Generator,
    word_rate: float = DEFAULT_WORD_RATE,
    letter_rate: float = DEFAULT_LETTER_RATE,
) -> str:
    """Insert meaningless noise words/letters between tokens; original
    tokens are preserved in order, so stripping the lexicon recovers the
    input exactly."""
    tokens = transcript.split(" ")
    out: list[str] = []
    for token in tokens:
        if word_rate > 0 and gen.random() < word_rate:
            out.append(str(NOISE_LEXICON_WORDS[int(gen.integers(len(NOISE_LEXICON_WORDS)))]))
        if letter_rate > 0 and gen.random() < letter_rate:
            out.append(str(NOISE_LEXICON_LETTERS[int(gen.integers(len(NOISE_LEXICON_LETTERS)))]))
        out.append(token)
    return " ".join(out)


def strip_noise_tokens(text: str) -> str:
    lexicon = set(NOISE_LEXICON_WORDS) | set(NOISE_LEXICON_LETTERS)
    return " ".join(t for t in text.split(" ") if t not in lexicon)


def _box_blur(img: np.ndarray, kernel: int) -> np.ndarray:
    if kernel <= 1:
        return img
    if kernel % 2 == 0:
        raise InterventionError("blur kernel must be odd")
    pad = kernel // 2
    acc = np.zeros_like(img, dtype=np.float64)
    padded = np.pad(img.astype(np.float64), ((pad, pad), (pad, pad), (0, 0)), mode="edge")
    for dy in range(kernel):
        for dx in range(kernel):
            acc += padded[dy:dy + img.shape[0], dx:dx + img.shape[1]]
    return np.clip(np.round(acc / (kernel * kernel)), 0, 255).astype(np.uint8)


def apply_image_noise(
    frame: np.ndarray,
    gen: np.random.Generator,
    gaussian_sigma: float = DEFAULT_GAUSSIAN_SIGMA,
    salt_pepper_p: float = DEFAULT_SALT_PEPPER_P,
    blur_kernel: int = DEFAULT_BLUR_KERNEL,
) -> np.ndarray:
    """Gaussian perturbation, then salt-and-pepper, then a slight box blur.
    Output dimensions always equal input dimensions."""
    out = frame.astype(np.float64)
    if gaussian_sigma > 0:
        out = out + gen.normal(0.0, gaussian_sigma, size=out.shape)
    out = np.clip(np.round(out), 0, 255).astype(np.uint8)
    if salt_pepper_p > 0:
        corrupt = gen.random(out.shape[:2]) < salt_pepper_p
        salt = gen.random(out.shape[:2]) < 0.5
        out[corrupt & salt] = 255
        out[corrupt & ~salt] = 0
    return _box_blur(out, blur_kernel)


# ---------------------------------------------------------------------------
# Aided prompts (echoes, melody)
# ---------------------------------------------------------------------------

def aided_hint_block(env: "Environment") -> str:
    from .envs.echoes import EchoesEnv
    from .envs.melody import MelodyEnv

    if isinstance(env, EchoesEnv):
        if env.phase != 2:
            return ""
        return (
            f"HINT: you are currently on step {env.cursor + 1} of "
            f"{len(env.sequence)} of the sequence."
        )
    if isinstance(env, MelodyEnv):
        if env.revealed:
            pairs = "; ".join(f"{c}->{env.revealed[c]}" for c in sorted(env.revealed))
        else:
            pairs = "none yet"
        return f"HINT: learned color-note mapping so far: {pairs}."
    return ""


def apply_aided_prompt(bundle: ObservationBundle, env: "Environment") -> ObservationBundle:
    block = aided_hint_block(env)
    if not block or bundle.text is None:
        return bundle
    return ObservationBundle(
        text=bundle.text + "\n" + block,
        frame=bundle.frame,
        video=bundle.video,
        audio=bundle.audio,
    )


# ---------------------------------------------------------------------------
# Substitution (phantom): audio disabled, transcript folded into the prompt
# ---------------------------------------------------------------------------

SUBSTITUTION_HEADER = "TACTICAL_GUIDANCE_TEXT:"


def apply_substitution(bundle: ObservationBundle) -> ObservationBundle:
    if bundle.audio is None or bundle.audio.transcript is None:
        return bundle
    transcript = bundle.audio.transcript
    text = (bundle.text or "") + f"\n{SUBSTITUTION_HEADER} {transcript}"
    return ObservationBundle(text=text, frame=bundle.frame, video=bundle.video, audio=None)


# ---------------------------------------------------------------------------
# Transform factory
# ---------------------------------------------------------------------------

def get_transform(config: InterventionConfig):
    """Build the per-episode observation transform for a config.

    Seeded variants derive one fresh generator per application from the
    episode's intervention substream, keyed by application index, so the
    sequence of transformed observations is reproducible."""
    if config.kind == "conflict":
        return lambda bundle, env: apply_conflict(bundle, config.channel)

    if config.kind == "ablation":
        return lambda bundle, env: apply_ablation(bundle, config.removed)

    if config.kind == "aided_prompt":
        return lambda bundle, env: apply_aided_prompt(bundle, env)

    if config.kind == "substitution":
        return lambda bundle, env: apply_substitution(bundle)

    if config.kind == "simplified":
        # Structural flag only: the echoes environment reads it at reset.
        return lambda bundle, env: bundle

    counter = {"n": 0}

    def noise_transform(bundle: ObservationBundle, env: "Environment") -> ObservationBundle:
        gen = rngmod.substream(env.descriptor.seed, f"{rngmod.INTERVENTION}:{counter['n']}")
        counter["n"] += 1
        params = config.params
        if config.target == "audio":
            if bundle.audio is None or bundle.audio.transcript is None:
                return bundle
            noisy = apply_audio_noise(
                bundle.audio.transcript,
                gen,
                word_rate=params.get("word_rate", DEFAULT_WORD_RATE),
                letter_rate=params.get("letter_rate", DEFAULT_LETTER_RATE),
            )
            audio = AudioPayload(kind=AudioKind.TRANSCRIPT, transcript=noisy)
            return ObservationBundle(
                text=bundle.text, frame=bundle.frame, video=bundle.video, audio=audio
            )
        sigma = params.get("gaussian_sigma", DEFAULT_GAUSSIAN_SIGMA)
        pepper = params.get("salt_pepper_p", DEFAULT_SALT_PEPPER_P)
        kernel = params.get("blur_kernel", DEFAULT_BLUR_KERNEL)
        frame = bundle.frame
        video = bundle.video
        if frame is not None:
            frame = apply_image_noise(frame, gen, sigma, pepper, kernel)
        if video is not None:
            video = VideoPayload(
                frames=[apply_image_noise(f, gen, sigma, pepper, kernel) for f in video.frames],
                fps=video.fps,
            )
        return ObservationBundle(text=bundle.text, frame=frame, video=video, audio=bundle.audio)

    return noise_transform
