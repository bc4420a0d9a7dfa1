"""Human play session service.

Thin JSON-over-HTTP wrapper around EpisodeRunner: the browser UI holds no
game logic and every state change round-trips through here. One in-flight
action per session is enforced with a sequence number; stale submissions
are rejected without touching the environment.

Warm-up gating: a participant unlocks recorded mode for a game only after
completing the required number of warm-up episodes. Warm-up episodes are
logged (so counts survive restarts) but flagged so they never enter
metrics; recorded episodes are appended to the human log only on normal
completion.
"""

from __future__ import annotations

import json
import mimetypes
import re
import threading
import uuid
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any, Optional

from .engine import EpisodeRunner, create_env
from .logs import EpisodeStore
from .render.audio import encode_wav, synthesize_audio
from .render.frames import encode_png
from .types import (
    SUPPORTED_DIFFICULTIES,
    AudioKind,
    Difficulty,
    EnvDescriptor,
    GameId,
)

WARMUP_REQUIRED = 10
RECORDED_TARGET = 10  # recorded episodes per participant per game


class SessionError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


class Session:
    def __init__(self, session_id: str, participant_id: str, mode: str, runner: EpisodeRunner):
        self.session_id = session_id
        self.participant_id = participant_id
        self.mode = mode
        self.runner = runner
        self.lock = threading.Lock()
        self.seq = 0
        self.closed = False
        self.logged = False
        self.assets: dict[str, tuple[str, bytes]] = {}

    def observation_payload(self, base: str) -> dict[str, Any]:
        runner = self.runner
        if runner.done:
            return {
                "done": True,
                "outcome": runner.outcome.value,
                "step": runner.steps_taken,
                "seq": self.seq,
            }
        bundle = runner.current_observation()
        self.assets.clear()
        payload: dict[str, Any] = {
            "done": False,
            "seq": self.seq,
            "step": runner.steps_taken,
            "prompt": bundle.text,
            "system_prompt": runner.env.system_prompt(),
            "legal_actions": runner.env.legal_action_schema(),
            "transcript": None,
            "frame_url": None,
            "audio_url": None,
            "video": None,
        }
        if bundle.frame is not None:
            name = f"frame_{runner.steps_taken}.png"
            self.assets[name] = ("image/png", encode_png(bundle.frame))
            payload["frame_url"] = f"{base}/assets/{name}"
        if bundle.video is not None:
            urls = []
            for i, frame in enumerate(bundle.video.frames):
                name = f"video_{runner.steps_taken}_{i}.png"
                self.assets[name] = ("image/png", encode_png(frame))
                urls.append(f"{base}/assets/{name}")
            payload["video"] = {"fps": bundle.video.fps, "frame_urls": urls}
        if bundle.audio is not None:
            if bundle.audio.kind is AudioKind.TRANSCRIPT:
                payload["transcript"] = bundle.audio.transcript
            else:
                name = f"audio_{runner.steps_taken}.wav"
                samples = synthesize_audio(bundle.audio)
                self.assets[name] = ("audio/wav", encode_wav(samples))
                payload["audio_url"] = f"{base}/assets/{name}"
        return payload


class SessionService:
    def __init__(self, data_dir: str | Path):
        self.store = EpisodeStore(Path(data_dir))
        self.sessions: dict[str, Session] = {}
        self.lock = threading.Lock()

    # -- progress & gating ---------------------------------------------------

    def progress(self, participant_id: str) -> dict[str, Any]:
        counts: dict[str, dict[str, int]] = {}
        agent_id = f"human:{participant_id}"
        for record in self.store.records():
            if record.agent_id != agent_id:
                continue
            game = record.descriptor.game_id.value
            entry = counts.setdefault(game, {"warmup": 0, "recorded": 0})
            if record.mode == "warmup":
                entry["warmup"] += 1
            elif record.mode == "recorded":
                entry["recorded"] += 1
        out = {}
        for game in GameId:
            entry = counts.get(game.value, {"warmup": 0, "recorded": 0})
            out[game.value] = {
                "warmup_count": entry["warmup"],
                "recorded_count": entry["recorded"],
                "warmup_required": WARMUP_REQUIRED,
                "recorded_target": RECORDED_TARGET,
                "recorded_unlocked": entry["warmup"] >= WARMUP_REQUIRED,
            }
        return {"participant_id": participant_id, "games": out}

    # -- session lifecycle ----------------------------------------------------

    def create_session(self, body: dict[str, Any]) -> Session:
        try:
            game = GameId(body["game"])
            difficulty = Difficulty(body["difficulty"])
            participant = str(body["participant_id"])
            mode = str(body.get("mode", "warmup"))
        except (KeyError, ValueError) as exc:
            raise SessionError(400, f"bad session request: {exc}")
        if mode not in ("warmup", "recorded"):
            raise SessionError(400, f"mode must be warmup|recorded, got {mode!r}")
        if mode == "recorded":
            gate = self.progress(participant)["games"][game.value]
            if not gate["recorded_unlocked"]:
                raise SessionError(
                    403,
                    f"recorded mode locked: {gate['warmup_count']}/{WARMUP_REQUIRED} "
                    f"warm-up episodes completed for {game.value}",
                )
        seed = int(body["seed"]) if "seed" in body else uuid.uuid4().int % 2**32
        try:
            descriptor = EnvDescriptor.create(game, difficulty, seed, body.get("step_cap"))
        except ValueError as exc:
            raise SessionError(400, str(exc))
        env = create_env(descriptor)
        runner = EpisodeRunner(
            env,
            agent_id=f"human:{participant}",
            asset_sink=self.store.asset_sink if mode == "recorded" else None,
            mode=mode,
        )
        session = Session(str(uuid.uuid4())[:8], participant, mode, runner)
        with self.lock:
            self.sessions[session.session_id] = session
        return session

    def get_session(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None or session.closed:
            raise SessionError(404, f"no such session: {session_id}")
        return session

    def submit_action(self, session: Session, body: dict[str, Any]) -> dict[str, Any]:
        try:
            seq = int(body["seq"])
            raw_text = str(body["raw_text"])
        except (KeyError, ValueError) as exc:
            raise SessionError(400, f"bad action request: {exc}")
        with session.lock:
            if session.runner.done:
                raise SessionError(409, "episode already finished")
            if seq != session.seq:
                raise SessionError(409, f"stale sequence number {seq} (current {session.seq})")
            envelope, note = session.runner.submit_reply(raw_text)
            session.seq += 1
            done = session.runner.done
            if done:
                self._finalize(session)
            return {
                "accepted": True,
                "valid": envelope.valid,
                "note": note,
                "done": done,
                "outcome": session.runner.outcome.value if done else None,
                "seq": session.seq,
            }

    def _finalize(self, session: Session) -> None:
        if session.logged:
            return
        record = session.runner.finalize()
        # Normal completion only; aborted/abandoned episodes never land in
        # the human log.
        self.store.append(record)
        session.logged = True

    def close_session(self, session: Session) -> dict[str, Any]:
        with session.lock:
            session.closed = True
            recorded = session.logged
            with self.lock:
                self.sessions.pop(session.session_id, None)
            return {"closed": True, "logged": recorded}

    def status(self, session: Session) -> dict[str, Any]:
        runner = session.runner
        return {
            "session_id": session.session_id,
            "participant_id": session.participant_id,
            "mode": session.mode,
            "game": runner.env.descriptor.game_id.value,
            "difficulty": runner.env.descriptor.difficulty.value,
            "seed": runner.env.descriptor.seed,
            "step": runner.steps_taken,
            "seq": session.seq,
            "done": runner.done,
            "outcome": runner.outcome.value if runner.done else None,
        }


_SESSION_RE = re.compile(r"^/api/sessions/([0-9a-f-]+)(/.*)?$")
_PROGRESS_RE = re.compile(r"^/api/participants/([^/]+)/progress$")


class _Handler(BaseHTTPRequestHandler):
    service: SessionService
    frontend_dir: Optional[Path] = None

    # quiet the default per-request stderr logging
    def log_message(self, fmt, *args):
        pass

    def _send_json(self, status: int, payload: dict[str, Any]) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_bytes(self, content_type: str, data: bytes) -> None:
        self.send_response(200)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _read_body(self) -> dict[str, Any]:
        length = int(self.headers.get("Content-Length", 0))
        if length == 0:
            return {}
        try:
            return json.loads(self.rfile.read(length))
        except json.JSONDecodeError as exc:
            raise SessionError(400, f"invalid JSON body: {exc}")

    def do_GET(self):  # noqa: N802 (http.server API)
        try:
            self._route_get()
        except SessionError as exc:
            self._send_json(exc.status, {"error": exc.message})

    def do_POST(self):  # noqa: N802
        try:
            self._route_post()
        except SessionError as exc:
            self._send_json(exc.status, {"error": exc.message})

    def _route_get(self) -> None:
        path = self.path.split("?", 1)[0]
        if path == "/api/games":
            self._send_json(
                200,
                {
                    "games": {
                        g.value: [d.value for d in SUPPORTED_DIFFICULTIES[g]] for g in GameId
                    },
                    "warmup_required": WARMUP_REQUIRED,
                    "recorded_target": RECORDED_TARGET,
                },
            )
            return
        progress_match = _PROGRESS_RE.match(path)
        if progress_match:
            self._send_json(200, self.service.progress(progress_match.group(1)))
            return
        session_match = _SESSION_RE.match(path)
        if session_match:
            session = self.service.get_session(session_match.group(1))
            tail = session_match.group(2) or ""
            if tail == "/observation":
                with session.lock:
                    payload = session.observation_payload(f"/api/sessions/{session.session_id}")
                self._send_json(200, payload)
                return
            if tail == "/status":
                self._send_json(200, self.service.status(session))
                return
            if tail.startswith("/assets/"):
                name = tail[len("/assets/"):]
                asset = session.assets.get(name)
                if asset is None:
                    raise SessionError(404, f"no such asset: {name}")
                self._send_bytes(asset[0], asset[1])
                return
        if self._serve_static(path):
            return
        raise SessionError(404, f"no route: {path}")

    def _route_post(self) -> None:
        path = self.path.split("?", 1)[0]
        if path == "/api/sessions":
            session = self.service.create_session(self._read_body())
            payload = self.service.status(session)
            self._send_json(201, payload)
            return
        session_match = _SESSION_RE.match(path)
        if session_match:
            session = self.service.get_session(session_match.group(1))
            tail = session_match.group(2) or ""
            if tail == "/action":
                self._send_json(200, self.service.submit_action(session, self._read_body()))
                return
            if tail == "/close":
                self._send_json(200, self.service.close_session(session))
                return
        raise SessionError(404, f"no route: {path}")

    def _serve_static(self, path: str) -> bool:
        if self.frontend_dir is None:
            return False
        rel = "index.html" if path == "/" else path.lstrip("/")
        target = (self.frontend_dir / rel).resolve()
        if not str(target).startswith(str(self.frontend_dir.resolve())) or not target.is_file():
            return False
        content_type = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        self._send_bytes(content_type, target.read_bytes())
        return True


def serve_sessions(
    host: str, port: int, data_dir: str | Path, frontend_dir: Optional[str | Path] = None
) -> ThreadingHTTPServer:
    """Build the HTTP server (caller runs serve_forever)."""
    service = SessionService(data_dir)

    class Handler(_Handler):
        pass

    Handler.service = service
    Handler.frontend_dir = Path(frontend_dir) if frontend_dir else None
    server = ThreadingHTTPServer((host, port), Handler)
    server.service = service  # type: ignore[attr-defined]
    return server
