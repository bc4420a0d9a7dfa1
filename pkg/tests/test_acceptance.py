"""Acceptance criteria.

Each test implements one criterion at its stated tolerance and prints one
PASS line (run with -v -s for the full checklist). Full-scale model
results depend on external models and are out of scope; what is checked
here is exact metric arithmetic against published numbers plus property
suites on the platform itself.
"""

import contextlib
import random
import time

import numpy as np
import pytest

from playbench import EnvDescriptor, create_env, replay, run_episode
from playbench import rng as rngmod
from playbench.agents import RandomAgent, ScriptedAgent, oracle_agent
from playbench.envs.showdown import MatchResult
from playbench.interventions import (
    InterventionConfig,
    apply_audio_noise,
    apply_conflict,
    apply_image_noise,
    get_transform,
)
from playbench.metrics import (
    echoes_final_from_values,
    nps,
    tournament_table,
    trimmed_mean,
)
from playbench.envs.phantom import phantom_score
from playbench.seeds import seeds_for
from playbench.types import Outcome


@contextlib.contextmanager
def criterion(name: str, budget_s: float):
    start = time.monotonic()
    yield
    elapsed = time.monotonic() - start
    assert elapsed < budget_s, f"{name} exceeded its {budget_s:.0f}s budget ({elapsed:.1f}s)"
    print(f"ACCEPTANCE {name}: PASS ({elapsed:.1f}s)")


SCRIPTS = {
    "pathfinding": ["ACTION: rotate=90 move=1", "ACTION: rotate=-45 move=0.5",
                    "ACTION: rotate=0 move=1"],
    "echoes": ["SEQUENCE: (0,0)=circle; (1,1)=star", "CLICK: (0,1)", "CLICK: (1,0)"],
    "melody": ["CLICK: red", "CLICK: blue", "CLICK: green", "CLICK: violet"],
    "phantom": ["COMMAND: unit=u1 move_to=(8,8)\nCOMMAND: unit=u2 scout",
                "COMMAND: unit=u1 capture\nCOMMAND: unit=u2 move_to=(2,9)"],
    "showdown": ["ACTION: move_east", "ACTION: place_bomb", "ACTION: move_west",
                 "ACTION: move_south", "ACTION: wait"],
}

GAMES = [
    ("pathfinding", "easy"),
    ("echoes", "medium"),
    ("melody", "medium"),
    ("phantom", "easy"),
    ("showdown", "none"),
]


def test_nps_golden():
    """Hard-difficulty table values reproduce the published 399.2."""
    with criterion("nps-golden", budget_s=1.0):
        model = echoes_final_from_values(10.2, 13.5, 13.5)
        human = echoes_final_from_values(2.6, 2.3, 4.6)
        rand = echoes_final_from_values(0.1, 0.07, 0.03)
        assert nps(model, human, rand) == pytest.approx(399.2, abs=0.1)


def test_tournament_golden():
    """Synthetic match logs reproduce 36.11% win rate and K/D 2.38."""
    with criterion("tournament-golden", budget_s=1.0):
        results = []
        for i in range(36):
            results.append(
                MatchResult(
                    agent_ids=["model", "x", "y", "z"],
                    kills=[3 if i < 31 else 0, 0, 0, 0],   # 31*3 = 93 kills
                    deaths=[0 if i < 33 else 13, 1, 1, 1],  # 3*13 = 39 deaths
                    placements=[1, 2, 3, 4],
                    winner=0 if i < 13 else 1,             # 13 wins in 36 games
                    ticks=100,
                )
            )
        row = next(r for r in tournament_table(results).rows if r.agent_id == "model")
        assert row.win_rate_pct == 36.11
        assert row.kd_ratio == 2.38


def test_phantom_score_arithmetic():
    """Ceiling formulas are exact, and the normalized score never leaves
    [0, 100] under 10,000 random inputs."""
    with criterion("phantom-arithmetic", budget_s=5.0):
        score = phantom_score(
            s_base=100.0, r_opt=10, r_max=20, rounds_used=10,
            completed_points=100.0, success_rate=1.0, all_initial_completed=True,
            b_dynamic=0.0,
        )
        assert score.s_max == 155.0

        gen = np.random.default_rng(11)
        for _ in range(10_000):
            fuzzed = phantom_score(
                s_base=float(gen.uniform(0.5, 1000)),
                r_opt=int(gen.integers(0, 100)),
                r_max=int(gen.integers(1, 100)),
                rounds_used=int(gen.integers(0, 150)),
                completed_points=float(gen.uniform(-500, 2000)),
                success_rate=float(gen.uniform(0, 1)),
                all_initial_completed=bool(gen.integers(0, 2)),
                b_dynamic=float(gen.uniform(0, 300)),
                s_aux=float(gen.uniform(0, 100)),
            )
            assert 0.0 <= fuzzed.s_norm <= 100.0


def test_melody_composite_bounds():
    """Perfect play scores exactly 100; the random baseline's mean
    composite over the full seed manifest lands inside [20, 31]."""
    with criterion("melody-composite", budget_s=30.0):
        env = create_env(EnvDescriptor.create("melody", "medium", 5))
        inverse = {note: color for color, note in env.mapping.pairs.items()}
        from playbench.envs.melody import TARGET_SCALE

        perfect = ScriptedAgent([f"CLICK: {inverse[n]}" for n in TARGET_SCALE], hold_last=False)
        record = run_episode(env, perfect)
        assert record.outcome is Outcome.GOAL_REACHED
        assert record.raw_metrics["composite_score"] == pytest.approx(100.0)

        scores = []
        for seed in seeds_for("melody"):
            rec = run_episode(
                create_env(EnvDescriptor.create("melody", "medium", seed)), RandomAgent("melody")
            )
            scores.append(rec.raw_metrics["composite_score"])
        mean = sum(scores) / len(scores)
        assert 20.0 <= mean <= 31.0, f"random mean composite {mean:.2f}"


def test_determinism_suite():
    """Identical (seed, scripted agent) runs digest identically for every
    game, and a 25-record corpus replays bit-exactly."""
    with criterion("determinism-replay", budget_s=120.0):
        for game, diff in GAMES:
            descriptor = EnvDescriptor.create(game, diff, 2024, step_cap=40)
            first = run_episode(create_env(descriptor), ScriptedAgent(SCRIPTS[game]))
            second = run_episode(create_env(descriptor), ScriptedAgent(SCRIPTS[game]))
            assert first.digest() == second.digest(), game

        corpus = []
        for game, diff in GAMES:
            for seed in seeds_for(game)[:5]:
                descriptor = EnvDescriptor.create(game, diff, seed, step_cap=30)
                corpus.append(run_episode(create_env(descriptor), ScriptedAgent(SCRIPTS[game])))
        assert len(corpus) == 25
        results = [replay(record) for record in corpus]
        assert all(r.match for r in results), [r.note for r in results if not r.match]


def test_oracle_random_separation():
    """Navigation hard over the full manifest: shortest-path-following
    oracle mean steps under a fifth of the random baseline's."""
    with criterion("oracle-random-separation", budget_s=300.0):
        seeds = seeds_for("pathfinding")
        oracle_steps = []
        random_steps = []
        for seed in seeds:
            oracle_rec = run_episode(
                create_env(EnvDescriptor.create("pathfinding", "hard", seed)),
                oracle_agent("pathfinding"),
            )
            assert oracle_rec.outcome is Outcome.GOAL_REACHED
            oracle_steps.append(oracle_rec.raw_metrics["steps"])
            random_rec = run_episode(
                create_env(EnvDescriptor.create("pathfinding", "hard", seed)),
                RandomAgent("pathfinding"),
            )
            random_steps.append(random_rec.raw_metrics["steps"])
        oracle_mean = sum(oracle_steps) / len(oracle_steps)
        random_mean = sum(random_steps) / len(random_steps)
        assert oracle_mean < 0.2 * random_mean, (oracle_mean, random_mean)


def _per_step_state_digests(game, diff, seed, intervention, steps=6):
    descriptor = EnvDescriptor.create(game, diff, seed, step_cap=steps)
    record = run_episode(create_env(descriptor), ScriptedAgent(SCRIPTS[game]), intervention)
    return [s.state_digest for s in record.steps]


def test_intervention_purity():
    """Every diagnostic transform leaves world-state digests untouched at
    every step, and audio-conflict under audio-ablation is identical to
    the ablation alone on all manifest seeds."""
    with criterion("intervention-purity", budget_s=120.0):
        cases = [
            ("pathfinding", "easy", InterventionConfig(kind="conflict", channel="audio")),
            ("pathfinding", "easy", InterventionConfig(kind="conflict", channel="text")),
            ("pathfinding", "easy", InterventionConfig(kind="ablation", removed="audio")),
            ("pathfinding", "easy", InterventionConfig(kind="ablation", removed="image")),
            ("pathfinding", "easy", InterventionConfig(kind="ablation", removed="text")),
            ("echoes", "medium", InterventionConfig(kind="ablation", removed="audio")),
            ("echoes", "medium", InterventionConfig(kind="aided_prompt")),
            ("echoes", "medium", InterventionConfig(kind="simplified")),
            ("melody", "medium", InterventionConfig(kind="aided_prompt")),
            ("phantom", "easy", InterventionConfig(kind="noise", target="audio")),
            ("phantom", "easy", InterventionConfig(kind="noise", target="image")),
            ("phantom", "easy", InterventionConfig(kind="substitution")),
        ]
        for game, diff, config in cases:
            baseline = _per_step_state_digests(game, diff, 41, None)
            intervened = _per_step_state_digests(game, diff, 41, config)
            # Simplified legitimately shortens the episode; compare the
            # shared prefix (world layouts must still agree step for step).
            shared = min(len(baseline), len(intervened))
            assert shared > 0
            assert baseline[:shared] == intervened[:shared], (game, config.kind)

        ablate = InterventionConfig(kind="ablation", removed="audio")
        ablate_transform = get_transform(ablate)
        script = SCRIPTS["pathfinding"]
        for seed in seeds_for("pathfinding"):
            descriptor = EnvDescriptor.create("pathfinding", "easy", seed, step_cap=4)
            ablated = run_episode(create_env(descriptor), ScriptedAgent(script), ablate)
            env = create_env(descriptor)
            composed = []
            for i in range(4):
                bundle = apply_conflict(env.observe(), "audio")
                bundle = ablate_transform(bundle, env)
                composed.append(bundle.digests())
                env.apply(env.parse_action(script[min(i, len(script) - 1)]))
                if env.episode_over() is not None:
                    break
            recorded = [s.observation for s in ablated.steps][: len(composed)]
            assert composed == recorded, seed


def test_noise_statistics():
    """Salt-and-pepper corruption and noise-token insertion both track
    their binomial expectations within 3 sigma over 100 seeded runs."""
    with criterion("noise-statistics", budget_s=30.0):
        frame = np.full((60, 80, 3), 128, dtype=np.uint8)
        n_pixels = 60 * 80
        p = 0.05
        corrupted_fractions = []
        for i in range(100):
            gen = rngmod.substream(i, "acceptance-sp")
            noisy = apply_image_noise(frame, gen, gaussian_sigma=0, salt_pepper_p=p, blur_kernel=1)
            corrupted_fractions.append((noisy != frame).any(axis=2).sum() / n_pixels)
        mean_fraction = float(np.mean(corrupted_fractions))
        sigma = (p * (1 - p) / n_pixels) ** 0.5 / 10.0  # sd of the 100-run mean
        assert abs(mean_fraction - p) < 3 * sigma

        text = " ".join(f"w{i}" for i in range(100))
        rate = 0.15
        counts = []
        for i in range(100):
            gen = rngmod.substream(i, "acceptance-tokens")
            noisy = apply_audio_noise(text, gen, word_rate=rate, letter_rate=0.0)
            counts.append(len(noisy.split()) - 100)
        mean_count = float(np.mean(counts))
        sigma_count = (100 * rate * (1 - rate)) ** 0.5 / 10.0
        assert abs(mean_count - 100 * rate) < 3 * sigma_count


def test_trimmed_mean_and_nps_units():
    """Spot values plus the affine-invariance property of normalization."""
    with criterion("trimmed-mean-nps-units", budget_s=1.0):
        assert trimmed_mean([1, 2, 3, 100]) == pytest.approx(2.5)
        assert nps(0.33, 7.0, 0.33) == pytest.approx(0.0)
        rng = random.Random(99)
        for _ in range(1000):
            model, human, rand = (rng.uniform(-100, 100) for _ in range(3))
            if abs(human - rand) < 1e-6:
                continue
            a = rng.uniform(0.05, 20.0)
            b = rng.uniform(-50, 50)
            assert nps(a * model + b, a * human + b, a * rand + b) == pytest.approx(
                nps(model, human, rand), rel=1e-9, abs=1e-7
            )
