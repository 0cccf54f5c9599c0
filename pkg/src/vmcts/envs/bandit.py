"""Depth-one bandit episodes: the root chooses an arm, the arm pays a bounded reward."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from vmcts.envs.base import SINGLE, IllegalMoveError

BERNOULLI = "bernoulli"
UNIFORM = "uniform"


def bandit_pull(means: np.ndarray, law: str, arm: int, rng: np.random.Generator) -> float:
    """One iid reward from ``arm``. Support is inside [0, 1] with mean ``means[arm]``.

    The uniform law is the widest interval centred on the mean that fits in
    [0, 1], e.g. mean 0.3 draws from U[0, 0.6].
    """
    q = float(means[arm])
    if law == BERNOULLI:
        return float(rng.random() < q)
    if law == UNIFORM:
        half = min(q, 1.0 - q)
        return q - half + 2.0 * half * rng.random()
    raise ValueError(f"unknown reward law {law!r}")


@dataclass(frozen=True, eq=False)
class BanditState:
    """Root of a bandit episode (``arm is None``) or the terminal after pulling ``arm``."""

    arm_means: tuple[float, ...]
    reward_law: str = BERNOULLI
    arm: int | None = None

    def __post_init__(self):
        if len(self.arm_means) < 2:
            raise ValueError("a bandit needs at least two arms")
        if any(not 0.0 <= q <= 1.0 for q in self.arm_means):
            raise ValueError("arm means must lie in [0, 1]")
        if self.reward_law not in (BERNOULLI, UNIFORM):
            raise ValueError(f"unknown reward law {self.reward_law!r}")

    player_to_move = SINGLE

    @property
    def move_number(self) -> int:
        return 0 if self.arm is None else 1

    @property
    def two_player(self) -> bool:
        return False

    @property
    def max_moves(self) -> int:
        return 1

    @property
    def env_id(self) -> str:
        return "bandit"

    @property
    def num_arms(self) -> int:
        return len(self.arm_means)

    def legal_actions(self) -> tuple[int, ...]:
        return () if self.arm is not None else tuple(range(self.num_arms))

    def is_terminal(self) -> bool:
        return self.arm is not None

    def apply(self, action: int) -> "BanditState":
        if self.arm is not None or not 0 <= action < self.num_arms:
            raise IllegalMoveError(f"cannot pull arm {action}")
        return BanditState(self.arm_means, self.reward_law, action)

    def terminal_value(self, rng: np.random.Generator | None = None) -> float:
        """A fresh reward sample each call: revisiting an arm is another pull."""
        if self.arm is None:
            raise IllegalMoveError("no arm has been pulled")
        if rng is None:
            return float(self.arm_means[self.arm])
        return bandit_pull(np.asarray(self.arm_means), self.reward_law, self.arm, rng)
