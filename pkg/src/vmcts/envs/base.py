"""State contract shared by every environment the search can drive."""

from __future__ import annotations

from typing import Protocol, Sequence, runtime_checkable

import numpy as np

FIRST = 0
SECOND = 1
SINGLE = -1


class IllegalMoveError(ValueError):
    """Raised when an action is applied that the state does not allow."""


class StateFormatError(ValueError):
    """Malformed text serialization. Carries the 1-based line/column of the fault."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@runtime_checkable
class GameState(Protocol):
    """Immutable game position.

    ``legal_actions`` returns integer action ids in ascending order; the
    position of an action in that list is its index for tie-breaking.
    ``terminal_value`` is from the first player's perspective for two-player
    games (``rng`` is only consumed by stochastic terminals such as bandit
    arm pulls).
    """

    player_to_move: int
    move_number: int

    def legal_actions(self) -> Sequence[int]: ...

    def apply(self, action: int) -> "GameState": ...

    def is_terminal(self) -> bool: ...

    def terminal_value(self, rng: np.random.Generator | None = None) -> float: ...

    @property
    def two_player(self) -> bool: ...

    @property
    def max_moves(self) -> int: ...
