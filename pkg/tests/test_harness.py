import json

import pytest

from playbench import run_episode
from playbench.agents import RandomAgent, oracle_agent
from playbench.config import RunConfig
from playbench.logs import EpisodeStore
from playbench.seeds import EPISODE_COUNTS, MANIFEST_VERSION, MASTER_SEED, generate_manifest, load_manifest, seeds_for
from playbench.types import GameId
from tests.conftest import fresh_env


class TestSeedManifest:
    def test_counts_follow_protocol(self):
        manifest = load_manifest()
        assert len(manifest["pathfinding"]) == 50
        assert len(manifest["echoes"]) == 50
        assert len(manifest["melody"]) == 50
        assert len(manifest["phantom"]) == 30
        assert len(manifest["showdown"]) == 50

    def test_frozen_file_matches_generator(self):
        # The shipped manifest is the one frozen from the master seed; the
        # generator stays in-repo so the freeze is auditable.
        assert load_manifest() == generate_manifest(MASTER_SEED)

    def test_seeds_unique_per_game(self):
        for game in GameId:
            seeds = seeds_for(game)
            assert len(set(seeds)) == len(seeds) == EPISODE_COUNTS[game]

    def test_version_checked(self, tmp_path):
        bad = {"version": MANIFEST_VERSION + 1}
        path = tmp_path / "m.json"
        path.write_text(json.dumps(bad))
        with pytest.raises(ValueError):
            load_manifest(path)


class TestEpisodeStore:
    def test_round_trip(self, tmp_path):
        store = EpisodeStore(tmp_path)
        records = [
            run_episode(fresh_env("melody", "medium", seed, step_cap=5), RandomAgent("melody"))
            for seed in (1, 2)
        ]
        for record in records:
            store.append(record)
        loaded = list(store.records())
        assert [r.digest() for r in loaded] == [r.digest() for r in records]

    def test_assets_written_once_under_digest(self, tmp_path):
        store = EpisodeStore(tmp_path)
        env = fresh_env("melody", "medium", 1, step_cap=4)
        record = run_episode(env, RandomAgent("melody"), asset_sink=store.asset_sink)
        pngs = list(tmp_path.glob("assets/*/*.png"))
        assert pngs, "frame assets missing"
        assert store.missing_assets(record) == []

    def test_missing_asset_detected(self, tmp_path):
        store = EpisodeStore(tmp_path)
        env = fresh_env("melody", "medium", 1, step_cap=3)
        record = run_episode(env, RandomAgent("melody"), asset_sink=store.asset_sink)
        victim = next(iter(tmp_path.glob("assets/*/*.png")))
        victim.unlink()
        assert store.missing_assets(record)

    def test_wav_and_video_assets(self, tmp_path):
        store = EpisodeStore(tmp_path)
        env = fresh_env("echoes", "easy", 1, step_cap=3)
        run_episode(env, oracle_agent("echoes"), asset_sink=store.asset_sink)
        assert list(tmp_path.glob("assets/*/*.json")), "video manifest missing"
        env2 = fresh_env("melody", "medium", 1, step_cap=3)
        run_episode(env2, RandomAgent("melody"), asset_sink=store.asset_sink)
        assert list(tmp_path.glob("assets/*/*.wav")), "tone waveform missing"

    def test_transcript_stored_as_text(self, tmp_path):
        store = EpisodeStore(tmp_path)
        env = fresh_env("pathfinding", "easy", 1, step_cap=2)
        run_episode(env, RandomAgent("pathfinding"), asset_sink=store.asset_sink)
        texts = list(tmp_path.glob("assets/*/*.txt"))
        assert texts and "Guidance" in texts[0].read_text()


class TestRunConfig:
    def test_from_dict_defaults(self):
        config = RunConfig.from_dict({"game": "melody", "difficulty": "medium"})
        assert config.agent == {"type": "random"}
        assert len(config.resolve_seeds()) == EPISODE_COUNTS[GameId.MELODY]

    def test_explicit_seeds_and_count(self):
        config = RunConfig.from_dict(
            {"game": "phantom", "difficulty": "easy", "seeds": [5, 6, 7], "episodes": 2}
        )
        assert config.resolve_seeds() == [5, 6]
        descriptors = config.descriptors()
        assert all(d.step_cap == 20 for d in descriptors)

    def test_from_file(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"game": "echoes", "difficulty": "hard", "episodes": 1}))
        config = RunConfig.from_file(path)
        assert config.game is GameId.ECHOES
        assert config.descriptors()[0].step_cap == 32
