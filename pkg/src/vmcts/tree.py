"""Flat-arena search tree.

Node ``i`` holds the statistics of the edge that leads into it: visit count
N(s,a), value sum, prior P(s,a) and immediate reward R(s,a). Children are
allocated when their parent is expanded, in legal-action order, so the
child's position in ``children[i]`` is the action index used for
tie-breaking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from vmcts.envs.base import FIRST, SECOND, SINGLE


class TreeError(ValueError):
    """Misuse of the tree API (unknown node, empty path, unexpanded node...)."""


@dataclass(frozen=True)
class NodeStats:
    visit_count: int
    value_sum: float
    prior: float
    reward: float
    expanded: bool

    @property
    def mean_value(self) -> float:
        if self.visit_count == 0:
            raise TreeError("mean value of an unvisited node is undefined")
        return self.value_sum / self.visit_count


class SearchTree:
    def __init__(self, root_state):
        self.root = 0
        self.visit_count: list[int] = [0]
        self.value_sum: list[float] = [0.0]
        self.prior: list[float] = [1.0]
        self.reward: list[float] = [0.0]
        self.expanded: list[bool] = [False]
        self.terminal: list[bool] = [root_state.is_terminal()]
        self.parent: list[int] = [-1]
        self.action: list[int] = [-1]
        self.children: list[list[int]] = [[]]
        self.actions: list[tuple[int, ...]] = [()]
        self.states: list = [root_state]
        # player whose move produced the node; the root's is the opponent of its mover
        self.mover: list[int] = [_other(root_state.player_to_move)]
        self.min_q = math.inf
        self.max_q = -math.inf
        self.evaluations = 0
        self.two_player = root_state.two_player
        self.terminal_hits = 0

    def __len__(self) -> int:
        return len(self.visit_count)

    def _check(self, node: int) -> None:
        if not 0 <= node < len(self.visit_count):
            raise TreeError(f"unknown node id {node}")

    def stats(self, node: int) -> NodeStats:
        self._check(node)
        return NodeStats(self.visit_count[node], self.value_sum[node], self.prior[node],
                         self.reward[node], self.expanded[node])

    def mean(self, node: int) -> float:
        return self.value_sum[node] / self.visit_count[node]

    def expand(self, node: int, actions, priors) -> None:
        """Attach one child per legal action with the given priors."""
        self._check(node)
        if self.expanded[node]:
            raise TreeError(f"node {node} is already expanded")
        mover = self.states[node].player_to_move
        actions = tuple(actions)
        priors = [float(p) for p in priors]
        m = len(actions)
        if len(priors) != m:
            raise TreeError("one prior per action is required")
        start = len(self.visit_count)
        kids = list(range(start, start + m))
        self.visit_count.extend([0] * m)
        self.value_sum.extend([0.0] * m)
        self.prior.extend(priors)
        self.reward.extend([0.0] * m)
        self.expanded.extend([False] * m)
        self.terminal.extend([False] * m)
        self.parent.extend([node] * m)
        self.action.extend(actions)
        self.children.extend([] for _ in range(m))
        self.actions.extend([()] * m)
        self.states.extend([None] * m)
        self.mover.extend([mover] * m)
        self.children[node] = kids
        self.actions[node] = actions
        self.expanded[node] = True

    def root_counts(self) -> np.ndarray:
        return self.child_arrays(self.root)[0]

    def child_arrays(self, node: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(visit counts, mean values with NaN for unvisited, priors) of ``node``'s children."""
        kids = self.children[node]
        if not kids:
            empty = np.zeros(0)
            return empty.astype(np.int64), empty, empty
        lo, hi = kids[0], kids[-1] + 1  # siblings are allocated as one contiguous block
        n = np.array(self.visit_count[lo:hi], dtype=np.int64)
        q = np.array(self.value_sum[lo:hi], dtype=np.float64) / np.maximum(n, 1)
        q[n == 0] = np.nan
        return n, q, np.array(self.prior[lo:hi], dtype=np.float64)

    def qbar(self, node: int, parent_qbar: float) -> float:
        """Default Q for unvisited children of ``node`` given its parent's default."""
        n, q, _ = self.child_arrays(node)
        return default_q(n, q, parent_qbar)

    def unvisited_q_default(self, node: int) -> float:
        """Q-bar of ``node``, evaluated down the parent chain from a zero base above the root."""
        self._check(node)
        chain = []
        while node != -1:
            chain.append(node)
            node = self.parent[node]
        value = 0.0
        for n in reversed(chain):
            value = self.qbar(n, value)
        return value

    def backpropagate(self, path: list[int], leaf_value: float, two_player: bool, discount: float = 1.0) -> None:
        """Add one visit along ``path`` (root first) backing up ``leaf_value``.

        ``leaf_value`` is from the perspective of the player who moved into the
        last node; in two-player mode the sign flips at every ply.
        """
        if not path:
            raise TreeError("cannot backpropagate along an empty path")
        g = None
        for node in reversed(path):
            if g is None:
                g = self.reward[node] + leaf_value
            else:
                g = self.reward[node] + discount * (-g if two_player else g)
            self.value_sum[node] += g
            self.visit_count[node] += 1
            if node != self.root:
                q = self.value_sum[node] / self.visit_count[node]
                if q < self.min_q:
                    self.min_q = q
                if q > self.max_q:
                    self.max_q = q

    def normalize(self, q):
        """Map Q into [0, 1] with the running min-max bounds (identity until they separate)."""
        if self.max_q > self.min_q:
            return (q - self.min_q) / (self.max_q - self.min_q)
        return q

    def clone(self) -> "SearchTree":
        other = SearchTree.__new__(SearchTree)
        for name, value in self.__dict__.items():
            if isinstance(value, list):
                value = [list(v) for v in value] if name == "children" else list(value)
            setattr(other, name, value)
        return other

    def snapshot(self) -> tuple:
        """Every statistic and structural field, for equality checks."""
        return (
            tuple(self.visit_count), tuple(self.value_sum), tuple(self.prior), tuple(self.reward),
            tuple(self.expanded), tuple(self.terminal), tuple(self.parent), tuple(self.action),
            tuple(tuple(c) for c in self.children), self.min_q, self.max_q,
        )


def default_q(counts: np.ndarray, means: np.ndarray, parent_qbar: float) -> float:
    """(parent default + sum of visited children's means) / (1 + number visited)."""
    visited = counts > 0
    return (parent_qbar + float(means[visited].sum())) / (1 + int(visited.sum()))


def _other(player: int) -> int:
    if player == FIRST:
        return SECOND
    if player == SECOND:
        return FIRST
    return SINGLE
