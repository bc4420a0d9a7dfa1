import math

import numpy as np
import pytest

from playbench.agents import RandomAgent, oracle_agent
from playbench.engine import run_episode
from playbench.envs.pathfinding import (
    GRID_SIZES,
    MIN_BFS_DISTANCE,
    Maze,
    NavAction,
    NavState,
    bfs_distance,
    generate_maze,
    guidance_transcript,
    nav_state_description,
    nav_step,
    parse_state_description,
    wall_distance,
)
from playbench.seeds import seeds_for
from playbench.types import Difficulty, Outcome
from tests.conftest import fresh_env


def room_cells(maze):
    return [
        (x, y)
        for y in range(1, maze.height, 2)
        for x in range(1, maze.width, 2)
    ]


class TestMazeGeneration:
    def test_deterministic(self):
        a = generate_maze(1, Difficulty.EASY)
        b = generate_maze(1, Difficulty.EASY)
        assert np.array_equal(a.walls, b.walls)
        assert a.start_cell == b.start_cell and a.target_cell == b.target_cell

    def test_sizes(self):
        for diff, size in GRID_SIZES.items():
            maze = generate_maze(3, diff)
            assert maze.walls.shape == (size, size)

    def test_perfect_maze(self):
        # A perfect maze is a tree over the rooms: all rooms reachable and
        # passages = rooms - 1 (exactly one path between any two cells).
        maze = generate_maze(1, Difficulty.EASY)
        rooms = room_cells(maze)
        assert all(maze.passable(x, y) for x, y in rooms)
        passages = 0
        for x, y in rooms:
            if maze.passable(x + 1, y):  # east passage (counted once)
                passages += 1
            if maze.passable(x, y + 1):  # south passage
                passages += 1
        assert passages == len(rooms) - 1
        assert all(bfs_distance(maze, rooms[0], r) >= 0 for r in rooms)

    @pytest.mark.parametrize("difficulty", [Difficulty.EASY, Difficulty.MEDIUM, Difficulty.HARD])
    def test_min_start_target_distance(self, difficulty):
        for seed in seeds_for("pathfinding")[:10]:
            maze = generate_maze(seed, difficulty)
            dist = bfs_distance(maze, maze.start_cell, maze.target_cell)
            assert dist >= MIN_BFS_DISTANCE[difficulty]

    def test_hard_distance_floor_seed_one(self):
        maze = generate_maze(1, Difficulty.HARD)
        assert bfs_distance(maze, maze.start_cell, maze.target_cell) >= 14


def _corridor_maze():
    """Straight horizontal corridor: rooms (1,1), (3,1), (5,1)."""
    walls = np.ones((3, 7), dtype=bool)
    walls[1, 1:6] = False
    return Maze(width=7, height=3, walls=walls, start_cell=(1, 1), target_cell=(5, 1))


class TestNavStep:
    def test_identity_action(self):
        maze = _corridor_maze()
        state = NavState(x=1.5, y=1.5, heading=90.0)
        after = nav_step(state, maze, NavAction(0.0, 0.0))
        assert (after.x, after.y, after.heading) == (1.5, 1.5, 90.0)
        assert after.steps_taken == 1

    def test_collision_truncation(self):
        maze = _corridor_maze()
        # Facing west from x=1.2: the wall boundary sits at x=1.0.
        state = NavState(x=1.2, y=1.5, heading=270.0)
        after = nav_step(state, maze, NavAction(0.0, 1.0))
        assert state.x - after.x == pytest.approx(0.2, abs=1e-6)
        assert maze.passable(int(after.x), int(after.y))

    def test_non_finite_is_invalid(self):
        maze = _corridor_maze()
        state = NavState(x=1.5, y=1.5, heading=0.0)
        after = nav_step(state, maze, NavAction(float("nan"), 1.0))
        assert (after.x, after.y) == (1.5, 1.5)
        assert after.invalid_count == 1

    def test_heading_normalized(self):
        maze = _corridor_maze()
        state = NavState(x=3.5, y=1.5, heading=350.0)
        after = nav_step(state, maze, NavAction(20.0, 0.0))
        assert after.heading == pytest.approx(10.0)

    def test_positions_stay_wall_free_under_fuzz(self):
        maze = generate_maze(9, Difficulty.MEDIUM)
        rng = np.random.default_rng(4)
        state = NavState(x=maze.start_cell[0] + 0.5, y=maze.start_cell[1] + 0.5, heading=0.0)
        for _ in range(500):
            action = NavAction(float(rng.uniform(-180, 180)), float(rng.uniform(0, 1)))
            state = nav_step(state, maze, action)
            assert maze.passable(int(math.floor(state.x)), int(math.floor(state.y)))


class TestGuidance:
    def test_deterministic(self):
        maze = generate_maze(2, Difficulty.EASY)
        state = NavState(x=maze.start_cell[0] + 0.5, y=maze.start_cell[1] + 0.5, heading=0.0)
        assert guidance_transcript(state, maze) == guidance_transcript(state, maze)

    def test_adjacent_target_straight_ahead(self):
        maze = _corridor_maze()
        maze.target_cell = (3, 1)
        state = NavState(x=2.5, y=1.5, heading=90.0)  # facing east, target next cell
        text = guidance_transcript(state, maze)
        assert text.startswith("Guidance: move forward")
        assert "1 step." in text or "2 steps." in text

    def test_clockwise_waypoint_says_turn_right(self):
        maze = _corridor_maze()
        # Facing north while the path leads east: 90 degrees clockwise.
        state = NavState(x=1.5, y=1.5, heading=0.0)
        assert "turn right" in guidance_transcript(state, maze)

    def test_counterclockwise_waypoint_says_turn_left(self):
        maze = _corridor_maze()
        maze.start_cell, maze.target_cell = (5, 1), (1, 1)
        state = NavState(x=5.5, y=1.5, heading=0.0)
        assert "turn left" in guidance_transcript(state, maze)


class TestTargetVisibility:
    def test_visible_down_a_straight_corridor(self):
        maze = _corridor_maze()
        state = nav_step(
            NavState(x=1.5, y=1.5, heading=90.0), maze, NavAction(0.0, 0.0)
        )
        assert state.target_visible  # target (5,1) shares the corridor

    def test_hidden_around_a_corner(self):
        # L-shaped passage: corridor along row 1 plus a stub below (1,1);
        # a target in the stub is out of sight from the far corridor end.
        walls = np.ones((5, 7), dtype=bool)
        walls[1, 1:6] = False
        walls[2, 1] = False
        walls[3, 1] = False
        maze = Maze(width=7, height=5, walls=walls, start_cell=(5, 1), target_cell=(1, 3))
        state = nav_step(
            NavState(x=5.5, y=1.5, heading=270.0), maze, NavAction(0.0, 0.0)
        )
        assert not state.target_visible


class TestStateDescription:
    def test_round_trip_exact(self):
        maze = generate_maze(5, Difficulty.EASY)
        state = NavState(x=2.123456789, y=1.5, heading=123.456)
        fields = parse_state_description(nav_state_description(state, maze))
        assert float(fields["POSITION_X"]) == state.x
        assert float(fields["POSITION_Y"]) == state.y
        assert float(fields["HEADING"]) == state.heading

    def test_target_due_north_reads_ahead(self):
        walls = np.ones((7, 3), dtype=bool)
        walls[1:6, 1] = False  # vertical corridor
        maze = Maze(width=3, height=7, walls=walls, start_cell=(1, 5), target_cell=(1, 1))
        state = NavState(x=1.5, y=5.5, heading=0.0)
        fields = parse_state_description(nav_state_description(state, maze))
        assert fields["TARGET_BEARING"] == "ahead"

    def test_field_order_fixed(self):
        maze = generate_maze(5, Difficulty.EASY)
        state = NavState(x=1.5, y=1.5, heading=0.0)
        lines = nav_state_description(state, maze).splitlines()
        assert [line.split(":")[0] for line in lines] == [
            "POSITION_X", "POSITION_Y", "HEADING", "STEPS_TAKEN",
            "INVALID_ACTIONS", "TARGET_X", "TARGET_Y", "TARGET_BEARING",
        ]


class TestPathfindingEnv:
    def test_action_grammar(self):
        env = fresh_env("pathfinding", "easy", 3)
        good = env.parse_action("I will go. ACTION: rotate=-90 move=1")
        assert good.valid and good.payload == {"rotate_deg": -90.0, "move_units": 1.0}
        assert env.parse_action("AcTiOn: ROTATE=45 MOVE=0.5").valid
        assert not env.parse_action("rotate ninety").valid
        assert not env.parse_action("ACTION: rotate=999 move=1").valid

    def test_oracle_matches_bfs_length(self):
        # Independent oracle: breadth-first search over the wall grid.
        for seed in seeds_for("pathfinding")[:10]:
            env = fresh_env("pathfinding", "medium", seed)
            expected = bfs_distance(env.maze, env.maze.start_cell, env.maze.target_cell)
            record = run_episode(env, oracle_agent("pathfinding"))
            assert record.outcome is Outcome.GOAL_REACHED
            assert abs(record.raw_metrics["steps"] - expected) <= 1

    def test_invalid_actions_leave_world_untouched(self):
        env = fresh_env("pathfinding", "easy", 3)
        before = env.state_digest()
        env.apply(env.parse_action("gibberish"))
        assert env.state_digest() == before
        assert env.state.invalid_count == 1

    def test_random_agent_much_slower_than_oracle_on_hard(self):
        seeds = seeds_for("pathfinding")[:12]
        oracle_steps = []
        random_steps = []
        for seed in seeds:
            oracle_steps.append(
                run_episode(fresh_env("pathfinding", "hard", seed), oracle_agent("pathfinding"))
                .raw_metrics["steps"]
            )
            random_steps.append(
                run_episode(fresh_env("pathfinding", "hard", seed), RandomAgent("pathfinding"))
                .raw_metrics["steps"]
            )
        assert sum(random_steps) / len(random_steps) >= 3 * sum(oracle_steps) / len(oracle_steps)

    def test_wall_distance_matches_truncation(self):
        env = fresh_env("pathfinding", "easy", 11)
        state = env.state
        limit = wall_distance(env.maze, state.x, state.y, state.heading)
        after = nav_step(state, env.maze, NavAction(0.0, 1.0))
        moved = math.dist((state.x, state.y), (after.x, after.y))
        assert moved == pytest.approx(min(1.0, limit), abs=1e-6)

    def test_observation_channels(self):
        env = fresh_env("pathfinding", "easy", 3)
        bundle = env.observe()
        assert bundle.frame is not None and bundle.frame.shape == (240, 320, 3)
        assert bundle.audio is not None and bundle.audio.transcript.startswith("Guidance:")
        assert "AVAILABLE INPUTS: image, audio, text" in bundle.text
