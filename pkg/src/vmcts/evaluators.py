"""Leaf evaluators: (prior over legal actions, value) pairs standing in for a trained network.

Values are always from the first player's perspective in two-player games;
the search flips signs during backup.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from vmcts.envs.bandit import BanditState, bandit_pull
from vmcts.envs.go import GoState
from vmcts.envs.mnk import MNKState


class EvaluatorError(RuntimeError):
    """The evaluator cannot handle the given state."""


@dataclass
class Evaluation:
    priors: np.ndarray
    value: float

    def __post_init__(self):
        self.priors = np.asarray(self.priors, dtype=np.float64)
        if self.priors.size and (self.priors.min() < 0 or abs(self.priors.sum() - 1.0) > 1e-6):
            raise EvaluatorError(f"priors must be a distribution, got {self.priors}")


class Evaluator(Protocol):
    def evaluate(self, state, rng: np.random.Generator) -> Evaluation: ...


def _uniform(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def rollout_evaluate(state, rng: np.random.Generator, num_rollouts: int) -> Evaluation:
    """Mean outcome of uniform-random playouts with uniform priors.

    Playouts that hit the environment's move cap are scored as terminal.
    """
    actions = state.legal_actions()
    priors = _uniform(len(actions))
    if num_rollouts <= 0:
        return Evaluation(priors, 0.0)
    if hasattr(state, "random_playouts"):
        return Evaluation(priors, float(state.random_playouts(rng, num_rollouts).mean()))
    total = 0.0
    for _ in range(num_rollouts):
        s = state
        while not s.is_terminal() and s.move_number < s.max_moves:
            legal = s.legal_actions()
            s = s.apply(legal[rng.integers(len(legal))])
        total += s.terminal_value(rng)
    return Evaluation(priors, total / num_rollouts)


class RolloutEvaluator:
    def __init__(self, num_rollouts: int = 32):
        self.num_rollouts = num_rollouts

    def evaluate(self, state, rng):
        return rollout_evaluate(state, rng, self.num_rollouts)


class MinimaxEvaluator:
    """Exact game value by memoised negamax; only for small m,n,k positions."""

    def __init__(self, max_empty: int = 9):
        self.max_empty = max_empty
        self._table: dict[MNKState, float] = {}

    def value(self, state: MNKState) -> float:
        """Minimax value from the first player's perspective."""
        if not isinstance(state, MNKState):
            raise EvaluatorError("minimax evaluation is only available for m,n,k games")
        if sum(1 for v in state.board if v == 0) > self.max_empty:
            raise EvaluatorError(f"position too large for exhaustive search (> {self.max_empty} empty cells)")
        return self._solve(state)

    def _solve(self, state: MNKState) -> float:
        cached = self._table.get(state)
        if cached is not None:
            return cached
        if state.is_terminal():
            v = state.terminal_value()
        else:
            children = [self._solve(state.apply(a)) for a in state.legal_actions()]
            v = max(children) if state.player_to_move == 0 else min(children)
        self._table[state] = v
        return v

    def evaluate(self, state, rng=None) -> Evaluation:
        v = self.value(state)
        actions = state.legal_actions()
        child = np.array([self._solve(state.apply(a)) for a in actions])
        best = child == (child.max() if state.player_to_move == 0 else child.min())
        return Evaluation(best / best.sum(), v)


class HeuristicGoEvaluator:
    """tanh of the Tromp-Taylor margin (black area - white area - komi)."""

    def __init__(self, slope: float = 0.5):
        self.slope = slope

    def evaluate(self, state: GoState, rng=None) -> Evaluation:
        if not isinstance(state, GoState):
            raise EvaluatorError("heuristic evaluator needs a Go state")
        n = len(state.legal_actions())
        return Evaluation(_uniform(n), math.tanh(self.slope * state.score()))


def bandit_evaluate(state: BanditState, arm: int, rng: np.random.Generator,
                    priors: np.ndarray | None = None) -> Evaluation:
    """A pull of ``arm`` as the value, with the arm priors as the policy."""
    if priors is None:
        priors = _uniform(state.num_arms)
    return Evaluation(priors, bandit_pull(np.asarray(state.arm_means), state.reward_law, arm, rng))


class BanditEvaluator:
    """Supplies the configured arm priors at the root; arm rewards come from pulls."""

    def __init__(self, priors=None):
        self.priors = None if priors is None else np.asarray(priors, dtype=np.float64)

    def evaluate(self, state: BanditState, rng) -> Evaluation:
        if state.is_terminal():
            raise EvaluatorError("terminal bandit states are scored by pulling, not evaluated")
        priors = self.priors if self.priors is not None else _uniform(state.num_arms)
        return Evaluation(priors, 0.0)

    def pull(self, state: BanditState, arm: int, rng) -> Evaluation:
        return bandit_evaluate(state, arm, rng, self.priors)


def make_evaluator(name: str, env_id: str = "", num_rollouts: int = 32, slope: float = 0.5, priors=None):
    if name == "rollout":
        return RolloutEvaluator(num_rollouts)
    if name == "minimax":
        return MinimaxEvaluator()
    if name == "heuristic":
        if env_id and env_id != "go":
            raise EvaluatorError("the heuristic evaluator is only defined for Go")
        return HeuristicGoEvaluator(slope)
    if name == "bandit":
        return BanditEvaluator(priors)
    raise ValueError(f"unknown evaluator {name!r}")
