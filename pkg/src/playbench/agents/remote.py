"""Remote model connector: provider-neutral chat requests over HTTP.

Observations are packed as one user message with typed content parts
(text, base64 PNG frames, base64 WAV audio or a labeled audio-channel
transcript). Transient failures retry with exponential backoff; anything
still failing afterwards raises TransportError, which aborts the episode.
"""

from __future__ import annotations

import base64
import os
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from ..render.audio import encode_wav, synthesize_audio
from ..render.frames import encode_png
from ..types import AudioKind, ObservationBundle
from .base import AgentConnector, TransportError

BACKOFF_BASE_S = 0.5
BACKOFF_CAP_S = 8.0


@dataclass
class EndpointConfig:
    base_url: str
    model: str
    auth_token_env: Optional[str] = None  # env var holding the bearer token
    max_retries: int = 3
    timeout_s: float = 60.0
    frames_per_request: int = 8
    send_images: bool = True
    send_audio: bool = True
    extra_headers: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "EndpointConfig":
        return cls(
            base_url=d["base_url"],
            model=d["model"],
            auth_token_env=d.get("auth_token_env"),
            max_retries=int(d.get("max_retries", 3)),
            timeout_s=float(d.get("timeout_s", 60.0)),
            frames_per_request=int(d.get("frames_per_request", 8)),
            send_images=bool(d.get("send_images", True)),
            send_audio=bool(d.get("send_audio", True)),
            extra_headers=dict(d.get("extra_headers", {})),
        )


def _thin_frames(frames: list, cap: int) -> list:
    if len(frames) <= cap:
        return frames
    idx = [round(i * (len(frames) - 1) / (cap - 1)) for i in range(cap)]
    return [frames[i] for i in idx]


def build_content_parts(bundle: ObservationBundle, config: EndpointConfig) -> list[dict[str, Any]]:
    parts: list[dict[str, Any]] = []
    if bundle.text is not None:
        parts.append({"type": "text", "text": bundle.text})
    if config.send_images:
        frame_list = []
        if bundle.frame is not None:
            frame_list.append(bundle.frame)
        if bundle.video is not None:
            frame_list.extend(_thin_frames(bundle.video.frames, config.frames_per_request))
        for frame in frame_list[: config.frames_per_request]:
            parts.append(
                {
                    "type": "image",
                    "media_type": "image/png",
                    "encoding": "base64",
                    "data": base64.b64encode(encode_png(frame)).decode("ascii"),
                }
            )
    if bundle.audio is not None:
        if bundle.audio.kind is AudioKind.TRANSCRIPT:
            # Transcript is the canonical audio payload; delivered as a
            # clearly labeled audio-channel text attachment.
            parts.append(
                {
                    "type": "audio_transcript",
                    "channel": "audio",
                    "text": bundle.audio.transcript,
                }
            )
        elif config.send_audio:
            wav = encode_wav(synthesize_audio(bundle.audio))
            parts.append(
                {
                    "type": "audio",
                    "media_type": "audio/wav",
                    "encoding": "base64",
                    "data": base64.b64encode(wav).decode("ascii"),
                }
            )
    return parts


def extract_reply_text(body: Any) -> str:
    """Pull the reply text out of the common response shapes."""
    if isinstance(body, str):
        return body
    if isinstance(body, dict):
        if isinstance(body.get("reply"), str):
            return body["reply"]
        choices = body.get("choices")
        if isinstance(choices, list) and choices:
            message = choices[0].get("message", {})
            content = message.get("content")
            if isinstance(content, str):
                return content
            if isinstance(content, list):
                return "".join(p.get("text", "") for p in content if isinstance(p, dict))
        content = body.get("content")
        if isinstance(content, str):
            return content
        if isinstance(content, list):
            return "".join(p.get("text", "") for p in content if isinstance(p, dict))
    raise TransportError(f"unrecognized response shape: {type(body).__name__}")


class RemoteAgent(AgentConnector):
    """One connector instance serves one episode at a time; instantiate one
    per concurrent episode against the same endpoint."""

    def __init__(
        self,
        config: EndpointConfig,
        agent_id: Optional[str] = None,
        transport: Optional[Callable[[str, dict, dict, float], tuple[int, Any]]] = None,
        sleeper: Callable[[float], None] = time.sleep,
    ):
        self.config = config
        self.agent_id = agent_id or f"remote:{config.model}"
        self._transport = transport or _requests_transport
        self._sleep = sleeper

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json", **self.config.extra_headers}
        if self.config.auth_token_env:
            token = os.environ.get(self.config.auth_token_env)
            if not token:
                raise TransportError(
                    f"auth token env var {self.config.auth_token_env!r} is not set"
                )
            headers["Authorization"] = f"Bearer {token}"
        return headers

    def act(self, system_prompt, bundle, history) -> str:
        messages: list[dict[str, Any]] = [
            {"role": "system", "content": [{"type": "text", "text": system_prompt}]}
        ]
        for past_prompt, past_reply in history:
            messages.append({"role": "user", "content": [{"type": "text", "text": past_prompt}]})
            messages.append({"role": "assistant", "content": [{"type": "text", "text": past_reply}]})
        messages.append({"role": "user", "content": build_content_parts(bundle, self.config)})
        request = {"model": self.config.model, "messages": messages}

        headers = self._headers()
        last_error: Optional[str] = None
        for attempt in range(self.config.max_retries + 1):
            if attempt > 0:
                self._sleep(min(BACKOFF_BASE_S * 2 ** (attempt - 1), BACKOFF_CAP_S))
            try:
                status, body = self._transport(
                    self.config.base_url, request, headers, self.config.timeout_s
                )
            except TransportError:
                raise
            except Exception as exc:  # connection errors are retryable
                last_error = str(exc)
                continue
            if status in (401, 403):
                raise TransportError(f"authentication failed (HTTP {status})")
            if 200 <= status < 300:
                return extract_reply_text(body)
            last_error = f"HTTP {status}"
        raise TransportError(
            f"endpoint failed after {self.config.max_retries + 1} attempts: {last_error}"
        )


def _requests_transport(url: str, payload: dict, headers: dict, timeout_s: float):
    import requests

    response = requests.post(url, json=payload, headers=headers, timeout=timeout_s)
    try:
        body = response.json()
    except ValueError:
        body = response.text
    return response.status_code, body
