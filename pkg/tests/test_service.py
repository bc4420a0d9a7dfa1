"""Session service tests: a scripted client drives real HTTP round trips
against a live server on an ephemeral port."""

import json
import threading
import urllib.error
import urllib.request

import pytest

from playbench import replay
from playbench.logs import load_records
from playbench.service import serve_sessions


@pytest.fixture
def service(tmp_path):
    server = serve_sessions("127.0.0.1", 0, tmp_path / "human")
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{server.server_address[1]}"
    yield base, tmp_path / "human"
    server.shutdown()


def _get(base, path):
    try:
        with urllib.request.urlopen(base + path) as response:
            return response.status, json.loads(response.read())
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read())


def _get_bytes(base, path):
    with urllib.request.urlopen(base + path) as response:
        return response.status, response.headers.get("Content-Type"), response.read()


def _post(base, path, body):
    request = urllib.request.Request(
        base + path, data=json.dumps(body).encode(), headers={"Content-Type": "application/json"}
    )
    try:
        with urllib.request.urlopen(request) as response:
            return response.status, json.loads(response.read())
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read())


GUIDANCE_TO_ROTATE = [
    ("turn sharply right", 135.0),
    ("turn slightly right", 45.0),
    ("turn sharply left", -135.0),
    ("turn slightly left", -45.0),
    ("turn right", 90.0),
    ("turn left", -90.0),
    ("turn around", 180.0),
    ("move forward", 0.0),
]


def _follow_guidance(transcript: str) -> str:
    for phrase, rotate in GUIDANCE_TO_ROTATE:
        if phrase in transcript:
            return f"ACTION: rotate={rotate} move=1"
    return "ACTION: rotate=0 move=1"


def _play_episode(base, session, max_steps=60):
    """Drive one pathfinding session to completion by obeying the spoken
    guidance (the audio channel alone suffices: designed complementarity)."""
    for _ in range(max_steps):
        _, obs = _get(base, f"/api/sessions/{session}/observation")
        if obs["done"]:
            return obs
        status, result = _post(
            base,
            f"/api/sessions/{session}/action",
            {"seq": obs["seq"], "raw_text": _follow_guidance(obs["transcript"])},
        )
        assert status == 200 and result["accepted"]
        if result["done"]:
            return result
    raise AssertionError("episode did not finish")


class TestSessionFlow:
    def test_games_listing(self, service):
        base, _ = service
        status, body = _get(base, "/api/games")
        assert status == 200
        assert body["games"]["melody"] == ["medium"]
        assert body["warmup_required"] == 10

    def test_full_episode_round_trip(self, service):
        base, human_dir = service
        status, session = _post(
            base,
            "/api/sessions",
            {"game": "pathfinding", "difficulty": "easy", "participant_id": "p1",
             "mode": "warmup", "seed": 7},
        )
        assert status == 201
        sid = session["session_id"]

        _, obs = _get(base, f"/api/sessions/{sid}/observation")
        assert obs["prompt"] and obs["transcript"].startswith("Guidance:")
        assert obs["legal_actions"]["kind"] == "continuous_nav"
        status, ctype, png = _get_bytes(base, obs["frame_url"])
        assert status == 200 and ctype == "image/png" and png[:4] == b"\x89PNG"

        final = _play_episode(base, sid)
        assert final["outcome"] == "goal_reached"
        records = load_records(human_dir)
        assert len(records) == 1 and records[0].mode == "warmup"

    def test_stale_sequence_rejected_without_state_change(self, service):
        base, _ = service
        _, session = _post(
            base,
            "/api/sessions",
            {"game": "melody", "difficulty": "medium", "participant_id": "p1", "seed": 3},
        )
        sid = session["session_id"]
        _, obs = _get(base, f"/api/sessions/{sid}/observation")
        status, _ = _post(base, f"/api/sessions/{sid}/action", {"seq": obs["seq"], "raw_text": "CLICK: red"})
        assert status == 200
        # Replaying the old sequence number must be rejected cleanly.
        status, body = _post(base, f"/api/sessions/{sid}/action", {"seq": obs["seq"], "raw_text": "CLICK: blue"})
        assert status == 409 and "stale" in body["error"]
        _, state = _get(base, f"/api/sessions/{sid}/status")
        assert state["step"] == 1

    def test_warmup_gate_blocks_recorded_mode(self, service):
        base, _ = service
        locked, body = _post(
            base,
            "/api/sessions",
            {"game": "melody", "difficulty": "medium", "participant_id": "fresh",
             "mode": "recorded"},
        )
        assert locked == 403 and "warm-up" in body["error"]

        # Ten completed warm-ups unlock recorded mode (step cap 1 makes
        # each warm-up a single action).
        for i in range(10):
            _, session = _post(
                base,
                "/api/sessions",
                {"game": "melody", "difficulty": "medium", "participant_id": "fresh",
                 "mode": "warmup", "seed": i, "step_cap": 1},
            )
            sid = session["session_id"]
            _, obs = _get(base, f"/api/sessions/{sid}/observation")
            _post(base, f"/api/sessions/{sid}/action", {"seq": 0, "raw_text": "CLICK: red"})
            if i == 8:
                status, _ = _post(
                    base,
                    "/api/sessions",
                    {"game": "melody", "difficulty": "medium", "participant_id": "fresh",
                     "mode": "recorded"},
                )
                assert status == 403  # nine warm-ups are not enough

        status, _ = _post(
            base,
            "/api/sessions",
            {"game": "melody", "difficulty": "medium", "participant_id": "fresh",
             "mode": "recorded", "seed": 99},
        )
        assert status == 201

    def test_recorded_episode_logged_and_replayable(self, service):
        base, human_dir = service
        for i in range(10):
            _, session = _post(
                base,
                "/api/sessions",
                {"game": "pathfinding", "difficulty": "easy", "participant_id": "p2",
                 "mode": "warmup", "seed": i, "step_cap": 1},
            )
            sid = session["session_id"]
            _get(base, f"/api/sessions/{sid}/observation")
            _post(base, f"/api/sessions/{sid}/action", {"seq": 0, "raw_text": "ACTION: rotate=0 move=0"})

        _, session = _post(
            base,
            "/api/sessions",
            {"game": "pathfinding", "difficulty": "easy", "participant_id": "p2",
             "mode": "recorded", "seed": 11},
        )
        final = _play_episode(base, session["session_id"])
        assert final["outcome"] == "goal_reached"
        recorded = [r for r in load_records(human_dir) if r.mode == "recorded"]
        assert len(recorded) == 1
        assert recorded[0].agent_id == "human:p2"
        result = replay(recorded[0])
        assert result.match, result.note

    def test_warmups_never_enter_metrics(self, service):
        base, human_dir = service
        _, session = _post(
            base,
            "/api/sessions",
            {"game": "melody", "difficulty": "medium", "participant_id": "p3",
             "mode": "warmup", "seed": 1, "step_cap": 1},
        )
        sid = session["session_id"]
        _get(base, f"/api/sessions/{sid}/observation")
        _post(base, f"/api/sessions/{sid}/action", {"seq": 0, "raw_text": "CLICK: red"})
        recorded = [r for r in load_records(human_dir) if r.mode == "recorded"]
        assert recorded == []

    def test_progress_endpoint(self, service):
        base, _ = service
        _, session = _post(
            base,
            "/api/sessions",
            {"game": "melody", "difficulty": "medium", "participant_id": "p4",
             "mode": "warmup", "seed": 1, "step_cap": 1},
        )
        sid = session["session_id"]
        _get(base, f"/api/sessions/{sid}/observation")
        _post(base, f"/api/sessions/{sid}/action", {"seq": 0, "raw_text": "CLICK: red"})
        _, progress = _get(base, "/api/participants/p4/progress")
        melody = progress["games"]["melody"]
        assert melody["warmup_count"] == 1
        assert not melody["recorded_unlocked"]

    def test_close_session(self, service):
        base, _ = service
        _, session = _post(
            base,
            "/api/sessions",
            {"game": "melody", "difficulty": "medium", "participant_id": "p5", "seed": 1},
        )
        sid = session["session_id"]
        status, body = _post(base, f"/api/sessions/{sid}/close", {})
        assert status == 200 and body["closed"]
        status, _ = _get(base, f"/api/sessions/{sid}/status")
        assert status == 404

    def test_abandoned_recorded_session_not_logged(self, service):
        base, human_dir = service
        for i in range(10):
            _, session = _post(
                base,
                "/api/sessions",
                {"game": "melody", "difficulty": "medium", "participant_id": "p6",
                 "mode": "warmup", "seed": i, "step_cap": 1},
            )
            sid = session["session_id"]
            _get(base, f"/api/sessions/{sid}/observation")
            _post(base, f"/api/sessions/{sid}/action", {"seq": 0, "raw_text": "CLICK: red"})
        _, session = _post(
            base,
            "/api/sessions",
            {"game": "melody", "difficulty": "medium", "participant_id": "p6",
             "mode": "recorded", "seed": 50},
        )
        _post(base, f"/api/sessions/{session['session_id']}/close", {})
        recorded = [r for r in load_records(human_dir) if r.mode == "recorded"]
        assert recorded == []

    def test_bad_requests(self, service):
        base, _ = service
        status, _ = _post(base, "/api/sessions", {"game": "melody"})
        assert status == 400
        status, _ = _post(base, "/api/sessions", {"game": "melody", "difficulty": "hard",
                                                  "participant_id": "x"})
        assert status == 400  # melody has a single difficulty
        status, _ = _get(base, "/api/sessions/nonexistent/status")
        assert status == 404


