import json
from pathlib import Path

import pytest

from playbench.cli import main
from playbench.logs import EpisodeStore, load_records


def _run_config(tmp_path, **overrides):
    config = {
        "game": "melody",
        "difficulty": "medium",
        "agent": {"type": "random"},
        "seeds": [1, 2, 3, 4],
        "episodes": 4,
        "step_cap": 12,
        "out_dir": str(tmp_path / "out"),
    }
    config.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    return path


class TestRunCommand:
    def test_dry_run_writes_nothing(self, tmp_path, capsys):
        path = _run_config(tmp_path)
        assert main(["run", "--config", str(path), "--dry-run"]) == 0
        assert "plan: 4 episodes" in capsys.readouterr().out
        assert not (tmp_path / "out").exists()

    def test_run_writes_records_and_report(self, tmp_path):
        path = _run_config(tmp_path)
        assert main(["run", "--config", str(path)]) == 0
        out = tmp_path / "out"
        records = load_records(out)
        assert len(records) == 4
        report = json.loads((out / "report.json").read_text())
        assert report["n_episodes"] == 4

    def test_refuses_to_overwrite_without_force(self, tmp_path, capsys):
        path = _run_config(tmp_path)
        assert main(["run", "--config", str(path)]) == 0
        assert main(["run", "--config", str(path)]) == 2
        assert "--force" in capsys.readouterr().err
        assert main(["run", "--config", str(path), "--force"]) == 0
        assert len(load_records(tmp_path / "out")) == 8

    def test_concurrent_run_matches_serial(self, tmp_path):
        serial_cfg = _run_config(tmp_path, out_dir=str(tmp_path / "serial"))
        assert main(["run", "--config", str(serial_cfg)]) == 0
        parallel_cfg = _run_config(tmp_path, out_dir=str(tmp_path / "parallel"), concurrency=4)
        assert main(["run", "--config", str(parallel_cfg)]) == 0
        serial = sorted(r.digest() for r in load_records(tmp_path / "serial"))
        parallel = sorted(r.digest() for r in load_records(tmp_path / "parallel"))
        assert serial == parallel


def _write_synthetic_sequence_logs(root: Path, mean_score, coord, icon, n=4):
    """Log set whose aggregation reproduces the given per-episode metrics."""
    from playbench.types import EnvDescriptor, EpisodeRecord, Outcome

    store = EpisodeStore(root)
    for i in range(n):
        record = EpisodeRecord(
            descriptor=EnvDescriptor.create("echoes", "hard", 1000 + i),
            agent_id="synthetic",
            steps=[],
            outcome=Outcome.ELIMINATED,
            raw_metrics={
                "sequence_length": 15,
                "execution_score": mean_score,
                "coord_acc": coord,
                "icon_acc": icon,
                "parse_failed": False,
                "success": False,
            },
        )
        store.append(record)


class TestScoreCommand:
    def test_reproduces_published_normalized_score(self, tmp_path, capsys):
        # Synthetic logs carrying the hard-difficulty table values:
        # model (10.2, 13.5, 13.5), human (2.6, 2.3, 4.6),
        # random (0.1, 0.07, 0.03) -> 399.2.
        _write_synthetic_sequence_logs(tmp_path / "model", 10.2, 13.5, 13.5)
        _write_synthetic_sequence_logs(tmp_path / "human", 2.6, 2.3, 4.6)
        _write_synthetic_sequence_logs(tmp_path / "random", 0.1, 0.07, 0.03)
        code = main([
            "score",
            "--logs", str(tmp_path / "model"),
            "--human", str(tmp_path / "human"),
            "--random", str(tmp_path / "random"),
            "--out", str(tmp_path / "scored"),
        ])
        assert code == 0
        payload = json.loads((tmp_path / "scored" / "score.json").read_text())
        assert payload["nps"] == pytest.approx(399.2, abs=0.1)

    def test_empty_dir_errors(self, tmp_path, capsys):
        empty = tmp_path / "empty"
        empty.mkdir()
        assert main(["score", "--logs", str(empty)]) == 2

    def test_recompute_is_bit_identical(self, tmp_path):
        _write_synthetic_sequence_logs(tmp_path / "model", 4.0, 5.0, 6.0)
        for out in ("a", "b"):
            main(["score", "--logs", str(tmp_path / "model"), "--out", str(tmp_path / out)])
        assert (tmp_path / "a" / "score.json").read_bytes() == (
            tmp_path / "b" / "score.json"
        ).read_bytes()

    def test_baseline_from_json_file(self, tmp_path, capsys):
        _write_synthetic_sequence_logs(tmp_path / "model", 10.2, 13.5, 13.5)
        (tmp_path / "human.json").write_text(json.dumps({"final_score": 3.025}))
        (tmp_path / "random.json").write_text(json.dumps({"final_score": 0.075}))
        code = main([
            "score",
            "--logs", str(tmp_path / "model"),
            "--human", str(tmp_path / "human.json"),
            "--random", str(tmp_path / "random.json"),
        ])
        assert code == 0
        assert "399.2" in capsys.readouterr().out


class TestTournamentCommand:
    def test_runs_and_sums(self, tmp_path, capsys):
        config = {
            "agents": [
                {"type": "random", "agent_id": f"r{i}", "seed": i} for i in range(5)
            ],
            "n_games": 6,
            "rotation_seed": 2,
            "out_dir": str(tmp_path / "tour"),
        }
        path = tmp_path / "tournament.json"
        path.write_text(json.dumps(config))
        assert main(["tournament", "--config", str(path)]) == 0
        table = json.loads((tmp_path / "tour" / "table.json").read_text())
        assert sum(row["games"] for row in table["rows"]) == 24

    def test_dry_run(self, tmp_path, capsys):
        config = {"agents": [{"type": "random"}] * 4, "n_games": 3}
        path = tmp_path / "tournament.json"
        path.write_text(json.dumps(config))
        assert main(["tournament", "--config", str(path), "--dry-run"]) == 0
        assert "plan:" in capsys.readouterr().out


class TestReplayCommand:
    def test_clean_logs_replay(self, tmp_path, capsys):
        path = _run_config(tmp_path, episodes=2, seeds=[1, 2])
        main(["run", "--config", str(path)])
        assert main(["replay", "--logs", str(tmp_path / "out")]) == 0
        assert "2/2 records replay clean" in capsys.readouterr().out

    def test_tampered_log_fails(self, tmp_path, capsys):
        path = _run_config(tmp_path, episodes=1, seeds=[1])
        main(["run", "--config", str(path)])
        episodes = tmp_path / "out" / "episodes.jsonl"
        body = json.loads(episodes.read_text())
        body["steps"][0]["action"]["raw_text"] = "CLICK: violet"
        body["steps"][0]["action"]["payload"] = {"color": "violet"}
        episodes.write_text(json.dumps(body) + "\n")
        assert main(["replay", "--logs", str(tmp_path / "out")]) == 1

    def test_empty_dir_errors(self, tmp_path):
        empty = tmp_path / "nothing"
        empty.mkdir()
        assert main(["replay", "--logs", str(empty)]) == 2
