from ..engine import Environment
from ..types import EnvDescriptor, GameId
from .echoes import EchoesEnv
from .melody import MelodyEnv
from .pathfinding import PathfindingEnv
from .phantom import PhantomEnv
from .showdown import ShowdownEnv

_ENV_CLASSES: dict[GameId, type[Environment]] = {
    GameId.PATHFINDING: PathfindingEnv,
    GameId.ECHOES: EchoesEnv,
    GameId.MELODY: MelodyEnv,
    GameId.PHANTOM: PhantomEnv,
    GameId.SHOWDOWN: ShowdownEnv,
}


def make_env(descriptor: EnvDescriptor) -> Environment:
    cls = _ENV_CLASSES.get(descriptor.game_id)
    if cls is None:
        from ..engine import UnknownGameError

        raise UnknownGameError(f"unknown game_id: {descriptor.game_id!r}")
    return cls(descriptor)


__all__ = [
    "EchoesEnv",
    "MelodyEnv",
    "PathfindingEnv",
    "PhantomEnv",
    "ShowdownEnv",
    "make_env",
]
