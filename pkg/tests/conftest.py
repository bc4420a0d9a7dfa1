import numpy as np
import pytest

from playbench import EnvDescriptor, create_env
from playbench.agents import ScriptedAgent


@pytest.fixture
def gray_frame():
    return np.full((60, 80, 3), 128, dtype=np.uint8)


def scripted(replies, agent_id="scripted"):
    return ScriptedAgent(list(replies), agent_id=agent_id)


def fresh_env(game, difficulty, seed, step_cap=None):
    return create_env(EnvDescriptor.create(game, difficulty, seed, step_cap))
