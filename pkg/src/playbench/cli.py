"""Command-line entry points: run | score | tournament | serve | replay."""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .agents import make_agent
from .config import RunConfig
from .engine import create_env, replay, run_episode
from .interventions import InterventionConfig
from .logs import EpisodeStore, load_records
from .metrics import (
    GAME_COLUMNS,
    aggregate,
    format_game_table,
    format_report_table,
    format_tournament_table,
    nps,
)
from .seeds import load_manifest, seeds_for
from .types import GameId, Outcome


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="playbench", description="Game benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a batch of episodes from a config file")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None, help="override output directory")
    p_run.add_argument("--seeds", default=None, help="seed manifest JSON override")
    p_run.add_argument("--force", action="store_true", help="allow writing into a non-empty dir")
    p_run.add_argument("--dry-run", action="store_true", help="print the plan, write nothing")
    p_run.add_argument("--concurrency", type=int, default=None)

    p_score = sub.add_parser("score", help="recompute reports and normalized scores from logs")
    p_score.add_argument("--logs", required=True, help="model episode log directory")
    p_score.add_argument("--human", default=None, help="human log dir or baseline JSON")
    p_score.add_argument("--random", dest="random_", default=None, help="random log dir or baseline JSON")
    p_score.add_argument("--out", default=None, help="write report files here")

    p_tour = sub.add_parser("tournament", help="run the 4-seat tournament protocol")
    p_tour.add_argument("--config", required=True)
    p_tour.add_argument("--out", default=None)
    p_tour.add_argument("--force", action="store_true")
    p_tour.add_argument("--dry-run", action="store_true")

    p_serve = sub.add_parser("serve", help="serve the human play session API")
    p_serve.add_argument("--bind", default="127.0.0.1:8713")
    p_serve.add_argument("--data", default="runs/human")
    p_serve.add_argument("--frontend", default=None, help="static UI directory to serve at /")

    p_replay = sub.add_parser("replay", help="verify recorded episodes replay bit-exactly")
    p_replay.add_argument("--logs", required=True)

    args = parser.parse_args(argv)
    return {
        "run": _cmd_run,
        "score": _cmd_score,
        "tournament": _cmd_tournament,
        "serve": _cmd_serve,
        "replay": _cmd_replay,
    }[args.command](args)


def _load_run_config(path: str) -> RunConfig:
    try:
        return RunConfig.from_file(path)
    except (OSError, ValueError, KeyError) as exc:
        raise SystemExit(f"error: cannot load config {path}: {exc}")


def _cmd_run(args) -> int:
    config = _load_run_config(args.config)
    if args.out:
        config.out_dir = args.out
    if args.seeds:
        config.seed_manifest_path = args.seeds
    if args.concurrency:
        config.concurrency = args.concurrency

    descriptors = config.descriptors()
    intervention = (
        InterventionConfig.from_dict(config.intervention) if config.intervention else None
    )
    if args.dry_run:
        print(f"plan: {len(descriptors)} episodes of {config.game.value}/{config.difficulty.value}")
        print(f"agent: {config.agent}")
        print(f"intervention: {config.intervention}")
        print(f"out: {config.out_dir} (concurrency {config.concurrency})")
        return 0

    out = Path(config.out_dir)
    store = EpisodeStore(out)
    if not store.is_empty() and not args.force:
        print(f"error: {out} already contains episodes; pass --force to append", file=sys.stderr)
        return 2

    def one(descriptor):
        env = create_env(descriptor)
        agent = make_agent(config.agent, config.game)
        return run_episode(env, agent, intervention, asset_sink=store.asset_sink)

    records = []
    if config.concurrency > 1:
        with ThreadPoolExecutor(max_workers=config.concurrency) as pool:
            records = list(pool.map(one, descriptors))
    else:
        records = [one(d) for d in descriptors]
    for record in records:
        store.append(record)

    report = aggregate(records)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    table = format_report_table([report])
    if report.game in GAME_COLUMNS:
        table += "\n\n" + format_game_table([report])
    (out / "report.txt").write_text(table + "\n")
    aborted = sum(1 for r in records if r.outcome is Outcome.ABORTED)
    print(table)
    print(f"wrote {len(records)} records ({aborted} aborted) to {out}")
    return 0


def _load_baseline(spec: str | None):
    """Baseline = episode log dir (aggregated) or JSON file {final_score}."""
    if spec is None:
        return None
    path = Path(spec)
    if path.is_dir():
        report = aggregate(load_records(path))
        return report.final_score
    with open(path, encoding="utf-8") as f:
        return float(json.load(f)["final_score"])


def _cmd_score(args) -> int:
    records = load_records(args.logs)
    if not records:
        print(f"error: no episode records in {args.logs}", file=sys.stderr)
        return 2
    report = aggregate(records)
    lines = [format_report_table([report])]
    if report.game in GAME_COLUMNS:
        lines.append(format_game_table([report]))
    payload = {"report": report.to_dict()}
    human = _load_baseline(args.human)
    random_ = _load_baseline(args.random_)
    if human is not None and random_ is not None and report.final_score is not None:
        value = nps(report.final_score, human, random_)
        payload["nps"] = value
        payload["baselines"] = {"human": human, "random": random_}
        lines.append(f"NPS: {value:.1f}  (human={human:.4f}, random={random_:.4f})")
    text = "\n".join(lines)
    print(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "score.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        (out / "score.txt").write_text(text + "\n")
    return 0


def _cmd_tournament(args) -> int:
    from .tournament import run_tournament

    with open(args.config, encoding="utf-8") as f:
        config = json.load(f)
    agent_specs = config["agents"]
    n_games = int(config.get("n_games", 50))
    rotation_seed = int(config.get("rotation_seed", 0))
    seeds = config.get("seeds")
    if seeds is None:
        seeds = seeds_for(GameId.SHOWDOWN, load_manifest(config.get("seed_manifest_path")))[:n_games]
    out_dir = args.out or config.get("out_dir", "runs/tournament")

    if args.dry_run:
        print(f"plan: {n_games} games, {len(agent_specs)} agents, out={out_dir}")
        return 0
    out = Path(out_dir)
    if (out / "matches.jsonl").exists() and not args.force:
        print(f"resuming from existing {out / 'matches.jsonl'}")

    agents = [make_agent(spec, GameId.SHOWDOWN) for spec in agent_specs]
    for i, (agent, spec) in enumerate(zip(agents, agent_specs)):
        agent.agent_id = spec.get("agent_id", f"{agent.agent_id}#{i}")
    results, table = run_tournament(
        agents, n_games=n_games, seeds=list(seeds), rotation_seed=rotation_seed, out_dir=out
    )
    text = format_tournament_table(table)
    out.mkdir(parents=True, exist_ok=True)
    (out / "table.json").write_text(json.dumps(table.to_dict(), indent=2, sort_keys=True) + "\n")
    (out / "table.txt").write_text(text + "\n")
    print(text)
    return 0


def _cmd_serve(args) -> int:
    from .service import serve_sessions

    host, _, port = args.bind.rpartition(":")
    server = serve_sessions(host or "127.0.0.1", int(port), args.data, args.frontend)
    print(f"session service listening on http://{args.bind}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
    return 0


def _cmd_replay(args) -> int:
    records = load_records(args.logs)
    if not records:
        print(f"error: no episode records in {args.logs}", file=sys.stderr)
        return 2
    failures = 0
    for i, record in enumerate(records):
        result = replay(record)
        status = "ok" if result.match else f"DIVERGED at step {result.divergence_step} ({result.note})"
        print(f"[{i:03d}] {record.descriptor.game_id.value} seed={record.descriptor.seed}: {status}")
        if not result.match:
            failures += 1
    print(f"{len(records) - failures}/{len(records)} records replay clean")
    return 0 if failures == 0 else 1


if __name__ == "__main__":
    raise SystemExit(main())
