from vmcts.envs.bandit import BanditState, bandit_pull
from vmcts.envs.base import FIRST, SECOND, SINGLE, GameState, IllegalMoveError, StateFormatError
from vmcts.envs.go import GoState
from vmcts.envs.mnk import MNKState


def make_env(env_id: str, size: int | None = None, komi: float = 6.5):
    """Initial state for ``tictactoe``, ``gomoku`` (default 7x7) or ``go`` (default 5x5)."""
    if env_id == "tictactoe":
        return MNKState.tictactoe()
    if env_id == "gomoku":
        return MNKState.gomoku(size or 7)
    if env_id == "go":
        return GoState(size or 5, komi=komi)
    raise ValueError(f"unknown environment {env_id!r}")


def parse_state(text: str):
    """Parse a text state file; the ``env`` header picks the game (default m,n,k)."""
    for line in text.splitlines():
        if line.strip().startswith("env:") and line.split(":", 1)[1].strip() == "go":
            return GoState.from_text(text)
    return MNKState.from_text(text)


__all__ = [
    "BanditState", "FIRST", "GameState", "GoState", "IllegalMoveError", "MNKState",
    "SECOND", "SINGLE", "StateFormatError", "bandit_pull", "make_env", "parse_state",
]
