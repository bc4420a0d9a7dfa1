import numpy as np
import pytest

from playbench import rng as rngmod
from playbench.types import (
    ActionEnvelope,
    AudioKind,
    AudioPayload,
    DescriptorError,
    Difficulty,
    EnvDescriptor,
    EpisodeRecord,
    GameId,
    ObservationBundle,
    Outcome,
    SchemaError,
    StepRecord,
    default_step_cap,
)


class TestSubstreams:
    def test_reproducible(self):
        a = rngmod.substream(7, rngmod.LAYOUT).integers(0, 1000, 10)
        b = rngmod.substream(7, rngmod.LAYOUT).integers(0, 1000, 10)
        assert np.array_equal(a, b)

    def test_named_streams_independent(self):
        layout = rngmod.substream(7, rngmod.LAYOUT).integers(0, 2**31, 20)
        noise = rngmod.substream(7, rngmod.NOISE).integers(0, 2**31, 20)
        assert not np.array_equal(layout, noise)

    def test_consuming_one_stream_never_shifts_another(self):
        probe = rngmod.substream(7, rngmod.INTERVENTION)
        probe.random(10_000)
        again = rngmod.substream(7, rngmod.LAYOUT).integers(0, 1000, 10)
        baseline = rngmod.substream(7, rngmod.LAYOUT).integers(0, 1000, 10)
        assert np.array_equal(again, baseline)


class TestDescriptor:
    def test_defaults(self):
        d = EnvDescriptor.create("pathfinding", "easy", 3)
        assert d.step_cap == 500
        assert EnvDescriptor.create("showdown", "none", 3).step_cap == 500
        assert EnvDescriptor.create("echoes", "hard", 3).step_cap == 2 + 2 * 15

    def test_melody_single_difficulty(self):
        EnvDescriptor.create("melody", "medium", 1)
        with pytest.raises(DescriptorError):
            EnvDescriptor.create("melody", "easy", 1)

    def test_showdown_has_no_graded_difficulty(self):
        with pytest.raises(DescriptorError):
            EnvDescriptor.create("showdown", "medium", 1)

    def test_step_cap_positive(self):
        with pytest.raises(DescriptorError):
            EnvDescriptor.create("pathfinding", "easy", 1, step_cap=0)

    def test_seed_range(self):
        with pytest.raises(DescriptorError):
            EnvDescriptor.create("pathfinding", "easy", -1)
        with pytest.raises(DescriptorError):
            EnvDescriptor.create("pathfinding", "easy", 2**64)

    def test_unknown_game(self):
        with pytest.raises(ValueError):
            EnvDescriptor.create("chess", "easy", 1)

    def test_round_trip(self):
        d = EnvDescriptor.create("phantom", "hard", 12)
        assert EnvDescriptor.from_dict(d.to_dict()) == d


class TestAudioPayload:
    def test_transcript_requires_text(self):
        with pytest.raises(ValueError):
            AudioPayload(kind=AudioKind.TRANSCRIPT, transcript="")

    def test_onsets_must_be_sorted(self):
        with pytest.raises(ValueError):
            AudioPayload(kind=AudioKind.TONES, tone_events=[("A4", 100, 50), ("B4", 0, 50)])
        AudioPayload(kind=AudioKind.TONES, tone_events=[("A4", 0, 50), ("B4", 100, 50)])

    def test_canonical_bytes_stable(self):
        a = AudioPayload(kind=AudioKind.TONES, tone_events=[("A4", 0, 50)])
        b = AudioPayload(kind=AudioKind.TONES, tone_events=[("A4", 0, 50)])
        assert a.canonical_bytes() == b.canonical_bytes()


class TestObservationBundle:
    def test_requires_a_channel(self):
        with pytest.raises(ValueError):
            ObservationBundle()

    def test_digests_cover_present_channels(self):
        frame = np.zeros((4, 4, 3), dtype=np.uint8)
        bundle = ObservationBundle(text="hi", frame=frame)
        digests = bundle.digests()
        assert set(digests) == {"text", "image"}

    def test_frame_digest_sensitive_to_content(self):
        f1 = np.zeros((4, 4, 3), dtype=np.uint8)
        f2 = f1.copy()
        f2[0, 0, 0] = 1
        d1 = ObservationBundle(frame=f1).digests()["image"]
        d2 = ObservationBundle(frame=f2).digests()["image"]
        assert d1 != d2


def _tiny_record(wall_clock: float) -> EpisodeRecord:
    return EpisodeRecord(
        descriptor=EnvDescriptor.create("melody", "medium", 5),
        agent_id="x",
        steps=[
            StepRecord(
                step_index=0,
                observation={"text": "aa"},
                action=ActionEnvelope(GameId.MELODY, {"color": "red"}, "CLICK: red", True),
                transition_note="n",
                state_digest="dd",
            )
        ],
        outcome=Outcome.GOAL_REACHED,
        raw_metrics={"completed": True},
        wall_clock_s=wall_clock,
    )


class TestEpisodeRecord:
    def test_round_trip(self):
        rec = _tiny_record(1.5)
        again = EpisodeRecord.from_dict(rec.to_dict())
        assert again.to_dict() == rec.to_dict()

    def test_digest_ignores_wall_clock(self):
        assert _tiny_record(1.0).digest() == _tiny_record(9.0).digest()

    def test_schema_version_enforced(self):
        body = _tiny_record(0.0).to_dict()
        body["schema_version"] = 99
        with pytest.raises(SchemaError):
            EpisodeRecord.from_dict(body)


def test_default_step_caps_by_game():
    assert default_step_cap(GameId.MELODY, Difficulty.MEDIUM) == 160
    assert default_step_cap(GameId.PHANTOM, Difficulty.EASY) == 20
    assert default_step_cap(GameId.PHANTOM, Difficulty.HARD) == 30
    assert default_step_cap(GameId.ECHOES, Difficulty.EASY) == 14
