"""Episode log persistence.

One record per line in `episodes.jsonl`; large channel artifacts (PNG
frames, WAV audio, video manifests) live in a sibling `assets/` tree keyed
by content digest, so identical artifacts are stored once.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path
from typing import Iterator

from .render.audio import encode_wav, synthesize_audio
from .render.frames import encode_png
from .types import AudioKind, EpisodeRecord, ObservationBundle, canonical_json, sha256_hex

EPISODES_FILE = "episodes.jsonl"
ASSETS_DIR = "assets"


class EpisodeStore:
    def __init__(self, root: str | Path, write_assets: bool = True):
        self.root = Path(root)
        self.write_assets = write_assets

    @property
    def episodes_path(self) -> Path:
        return self.root / EPISODES_FILE

    def _asset_path(self, digest: str, suffix: str) -> Path:
        return self.root / ASSETS_DIR / digest[:2] / f"{digest}{suffix}"

    def _write_asset(self, digest: str, suffix: str, data: bytes) -> None:
        path = self._asset_path(digest, suffix)
        if path.exists():
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        # Unique temp name per writer: concurrent episodes may race to
        # store the same digest, and the content is identical either way.
        tmp = path.with_suffix(path.suffix + f".{os.getpid()}.{threading.get_ident()}.tmp")
        tmp.write_bytes(data)
        try:
            os.replace(tmp, path)
        except FileNotFoundError:
            if not path.exists():
                raise

    def asset_sink(self, bundle: ObservationBundle, digests: dict[str, str]) -> None:
        """Persist one observation's channel artifacts under their digests."""
        if not self.write_assets:
            return
        if bundle.frame is not None:
            self._write_asset(digests["image"], ".png", encode_png(bundle.frame))
        if bundle.video is not None:
            frame_digests = []
            for i, frame in enumerate(bundle.video.frames):
                fd = sha256_hex(
                    f"frame:{frame.shape[1]}x{frame.shape[0]}:".encode() + frame.tobytes()
                )
                self._write_asset(fd, ".png", encode_png(frame))
                frame_digests.append(
                    {"index": i, "timestamp_ms": round(i * 1000.0 / bundle.video.fps), "frame": fd}
                )
            manifest = canonical_json({"fps": bundle.video.fps, "frames": frame_digests})
            self._write_asset(digests["video"], ".json", manifest.encode("utf-8"))
        if bundle.audio is not None:
            if bundle.audio.kind is AudioKind.TRANSCRIPT:
                self._write_asset(
                    digests["audio"], ".txt", bundle.audio.transcript.encode("utf-8")
                )
            else:
                self._write_asset(
                    digests["audio"], ".wav", encode_wav(synthesize_audio(bundle.audio))
                )

    def append(self, record: EpisodeRecord) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        with open(self.episodes_path, "a", encoding="utf-8") as f:
            f.write(canonical_json(record.to_dict()) + "\n")

    def records(self) -> Iterator[EpisodeRecord]:
        if not self.episodes_path.exists():
            return
        with open(self.episodes_path, encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if line:
                    yield EpisodeRecord.from_dict(json.loads(line))

    def is_empty(self) -> bool:
        return not self.episodes_path.exists()

    def missing_assets(self, record: EpisodeRecord) -> list[str]:
        """Digests referenced by the record with no stored artifact."""
        missing = []
        suffix_by_channel = {"image": ".png", "video": ".json", "audio": None, "text": None}
        for step in record.steps:
            for channel, digest in step.observation.items():
                suffix = suffix_by_channel.get(channel)
                if channel == "audio":
                    if not (
                        self._asset_path(digest, ".wav").exists()
                        or self._asset_path(digest, ".txt").exists()
                    ):
                        missing.append(digest)
                elif suffix is not None and not self._asset_path(digest, suffix).exists():
                    missing.append(digest)
        return missing


def load_records(path: str | Path) -> list[EpisodeRecord]:
    return list(EpisodeStore(path).records())
