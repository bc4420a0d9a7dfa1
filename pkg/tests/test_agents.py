import math

import numpy as np
import pytest

from playbench import rng as rngmod
from playbench.agents import (
    EndpointConfig,
    RandomAgent,
    RemoteAgent,
    ScriptedAgent,
    TransportError,
    make_agent,
    oracle_agent,
)
from playbench.agents.random_agent import sample_showdown_action
from playbench.agents.remote import build_content_parts, extract_reply_text
from playbench.engine import run_episode
from playbench.envs.showdown import ACTIONS
from playbench.types import AudioKind, AudioPayload, GameId, ObservationBundle, Outcome
from tests.conftest import fresh_env


class TestRandomAgent:
    def test_menu_frequencies_uniform(self):
        # Chi-square-style check: every action count within 5 sigma of the
        # uniform expectation over 10,000 draws.
        gen = rngmod.substream(17, "menu-test")
        counts = {action: 0 for action in ACTIONS}
        n = 10_000
        for _ in range(n):
            counts[sample_showdown_action(gen)] += 1
        p = 1 / len(ACTIONS)
        sigma = math.sqrt(n * p * (1 - p))
        for action, count in counts.items():
            assert abs(count - n * p) < 5 * sigma, (action, count)

    @pytest.mark.parametrize(
        "game,diff",
        [
            ("pathfinding", "easy"),
            ("echoes", "easy"),
            ("melody", "medium"),
            ("phantom", "easy"),
            ("showdown", "none"),
        ],
    )
    def test_never_emits_invalid_actions(self, game, diff):
        record = run_episode(fresh_env(game, diff, 21, step_cap=15), RandomAgent(game))
        assert record.raw_metrics["invalid_actions"] == 0

    def test_episode_seeded_reproducible(self):
        env1 = fresh_env("melody", "medium", 5, step_cap=10)
        env2 = fresh_env("melody", "medium", 5, step_cap=10)
        a = run_episode(env1, RandomAgent("melody", seed=1))
        b = run_episode(env2, RandomAgent("melody", seed=2))
        # Construction seed is irrelevant: the episode seed governs.
        assert [s.action.raw_text for s in a.steps] == [s.action.raw_text for s in b.steps]


class TestOracleFactory:
    def test_all_games_covered(self):
        for game in GameId:
            agent = oracle_agent(game)
            assert agent.agent_id.startswith("oracle:")

    def test_make_agent_specs(self):
        assert make_agent({"type": "random"}, GameId.MELODY).agent_id == "random"
        assert make_agent({"type": "oracle"}, GameId.ECHOES).agent_id == "oracle:echoes"
        scripted = make_agent({"type": "scripted", "replies": ["x"]}, GameId.MELODY)
        assert scripted.act("", ObservationBundle(text="t"), []) == "x"
        with pytest.raises(ValueError):
            make_agent({"type": "psychic"}, GameId.MELODY)


def _bundle_with_everything():
    frame = np.zeros((8, 8, 3), dtype=np.uint8)
    audio = AudioPayload(kind=AudioKind.TONES, tone_events=[("A4", 0, 100)])
    return ObservationBundle(text="prompt", frame=frame, audio=audio)


class TestRemoteAgentTransport:
    def _config(self, **kw):
        defaults = dict(base_url="http://unit.test/chat", model="m1", max_retries=2)
        defaults.update(kw)
        return EndpointConfig(**defaults)

    def test_fixed_valid_action_completes_episode(self):
        def transport(url, payload, headers, timeout):
            return 200, {"reply": "CLICK: red"}

        agent = RemoteAgent(self._config(), transport=transport, sleeper=lambda s: None)
        record = run_episode(fresh_env("melody", "medium", 5, step_cap=6), agent)
        assert record.raw_metrics["invalid_actions"] == 0

    def test_prose_with_embedded_action_parses(self):
        def transport(url, payload, headers, timeout):
            return 200, {"choices": [{"message": {"content": "Let me think. CLICK: blue. Done."}}]}

        agent = RemoteAgent(self._config(), transport=transport, sleeper=lambda s: None)
        env = fresh_env("melody", "medium", 5)
        reply = agent.act(env.system_prompt(), env.observe(), [])
        envelope = env.parse_action(reply)
        assert envelope.valid and envelope.payload["color"] == "blue"

    def test_500_exhausts_retries_and_aborts_episode(self):
        calls = {"n": 0}

        def transport(url, payload, headers, timeout):
            calls["n"] += 1
            return 500, {"error": "overloaded"}

        agent = RemoteAgent(self._config(max_retries=2), transport=transport, sleeper=lambda s: None)
        record = run_episode(fresh_env("melody", "medium", 5), agent)
        assert record.outcome is Outcome.ABORTED
        assert calls["n"] == 3  # initial + 2 retries

    def test_backoff_is_exponential(self):
        sleeps = []

        def transport(url, payload, headers, timeout):
            return 503, {}

        agent = RemoteAgent(
            self._config(max_retries=3), transport=transport, sleeper=sleeps.append
        )
        with pytest.raises(TransportError):
            agent.act("sys", ObservationBundle(text="t"), [])
        assert sleeps == [0.5, 1.0, 2.0]

    def test_auth_failure_is_immediate(self):
        calls = {"n": 0}

        def transport(url, payload, headers, timeout):
            calls["n"] += 1
            return 401, {}

        agent = RemoteAgent(self._config(max_retries=5), transport=transport, sleeper=lambda s: None)
        with pytest.raises(TransportError):
            agent.act("sys", ObservationBundle(text="t"), [])
        assert calls["n"] == 1

    def test_missing_auth_env_var(self, monkeypatch):
        monkeypatch.delenv("UNIT_TEST_TOKEN", raising=False)
        agent = RemoteAgent(self._config(auth_token_env="UNIT_TEST_TOKEN"))
        with pytest.raises(TransportError):
            agent.act("sys", ObservationBundle(text="t"), [])

    def test_history_folded_into_messages(self):
        captured = {}

        def transport(url, payload, headers, timeout):
            captured.update(payload)
            return 200, {"reply": "ok"}

        agent = RemoteAgent(self._config(), transport=transport, sleeper=lambda s: None)
        agent.act("sys", ObservationBundle(text="now"), [("before", "answer")])
        roles = [m["role"] for m in captured["messages"]]
        assert roles == ["system", "user", "assistant", "user"]


class TestContentParts:
    def test_transcript_delivered_as_labeled_audio_text(self):
        audio = AudioPayload(kind=AudioKind.TRANSCRIPT, transcript="turn left")
        bundle = ObservationBundle(text="p", audio=audio)
        parts = build_content_parts(bundle, EndpointConfig(base_url="u", model="m"))
        transcript_parts = [p for p in parts if p["type"] == "audio_transcript"]
        assert transcript_parts and transcript_parts[0]["channel"] == "audio"
        assert transcript_parts[0]["text"] == "turn left"

    def test_tones_encoded_as_wav(self):
        parts = build_content_parts(
            _bundle_with_everything(), EndpointConfig(base_url="u", model="m")
        )
        audio_parts = [p for p in parts if p["type"] == "audio"]
        assert audio_parts and audio_parts[0]["media_type"] == "audio/wav"

    def test_frames_capped(self):
        from playbench.types import VideoPayload

        frames = [np.zeros((4, 4, 3), dtype=np.uint8) for _ in range(30)]
        bundle = ObservationBundle(text="p", video=VideoPayload(frames=frames, fps=5.0))
        parts = build_content_parts(
            bundle, EndpointConfig(base_url="u", model="m", frames_per_request=4)
        )
        assert sum(1 for p in parts if p["type"] == "image") == 4

    def test_capability_flags_suppress_attachments(self):
        parts = build_content_parts(
            _bundle_with_everything(),
            EndpointConfig(base_url="u", model="m", send_images=False, send_audio=False),
        )
        assert all(p["type"] == "text" for p in parts)


class TestReplyExtraction:
    def test_shapes(self):
        assert extract_reply_text({"reply": "a"}) == "a"
        assert extract_reply_text({"choices": [{"message": {"content": "b"}}]}) == "b"
        assert extract_reply_text({"content": [{"type": "text", "text": "c"}]}) == "c"
        assert extract_reply_text("plain") == "plain"
        with pytest.raises(TransportError):
            extract_reply_text(42)


def test_scripted_agent_cycles_and_holds():
    agent = ScriptedAgent(["a", "b"])
    bundle = ObservationBundle(text="t")
    assert [agent.act("", bundle, []) for _ in range(4)] == ["a", "b", "b", "b"]
