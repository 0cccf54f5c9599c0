"""Vanilla P-UCT Monte-Carlo tree search and root exploration mechanics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from vmcts.envs.base import FIRST, SINGLE
from vmcts.tree import SearchTree, TreeError, default_q

C1 = 1.25
C2 = 19652.0


class SearchError(ValueError):
    """Invalid search input, such as searching a terminal state."""


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for one search. Defaults are evaluation mode: no noise, argmax moves.

    ``resign_threshold=None`` disables resignation. ``reference_legal_moves``
    scales the Dirichlet concentration by typical/current legal-move count
    (None leaves it unscaled). Noise is only mixed in when ``root_noise`` is set.
    """

    budget: int = 150
    c1: float = C1
    c2: float = C2
    discount: float = 1.0
    two_player: bool = True
    dirichlet_alpha: float = 0.3
    noise_fraction: float = 0.25
    root_noise: bool = False
    reference_legal_moves: int | None = None
    temperature_moves: int = 0
    resign_threshold: float | None = -0.9
    seed: int = 0
    normalize_q: bool = True

    def __post_init__(self):
        if self.budget < 2:
            raise ValueError("budget must be at least 2")
        if self.c1 <= 0 or self.c2 <= 0:
            raise ValueError("c1 and c2 must be positive")
        if not 0 < self.discount <= 1:
            raise ValueError("discount must lie in (0, 1]")
        if self.dirichlet_alpha <= 0:
            raise ValueError("dirichlet_alpha must be positive")
        if not 0 <= self.noise_fraction <= 1:
            raise ValueError("noise_fraction must lie in [0, 1]")
        if self.temperature_moves < 0:
            raise ValueError("temperature_moves must be non-negative")
        if self.resign_threshold is not None and not -1 <= self.resign_threshold < 0:
            raise ValueError("resign_threshold must lie in [-1, 0)")

    def with_(self, **changes) -> "SearchConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class Policy:
    probabilities: np.ndarray
    support: tuple[int, ...]

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=np.float64)
        object.__setattr__(self, "probabilities", p)
        if p.shape != (len(self.support),):
            raise ValueError("probabilities and support differ in length")
        if p.size and (p.min() < 0 or p.max() > 1 or abs(p.sum() - 1.0) > 1e-9):
            raise ValueError(f"not a probability distribution: {p}")

    @classmethod
    def from_counts(cls, counts, support, total: int) -> "Policy":
        return cls(np.asarray(counts, dtype=np.float64) / total, tuple(support))

    def argmax(self) -> int:
        return self.support[int(np.argmax(self.probabilities))]

    def as_dict(self) -> dict[int, float]:
        return {a: float(p) for a, p in zip(self.support, self.probabilities)}


@dataclass
class SearchOutcome:
    policy: Policy
    chosen_action: int
    iterations_used: int
    terminated_early: bool = False
    resigned: bool = False
    trace: list[dict[str, Any]] | None = None
    tree: SearchTree | None = field(default=None, repr=False)
    # generator state right after the last real iteration, before move sampling
    rng_state: dict | None = field(default=None, repr=False)


def puct_scores(q: np.ndarray, prior: np.ndarray, counts: np.ndarray, total: int,
                c1: float, c2: float) -> np.ndarray:
    explore = math.sqrt(total) * (c1 + math.log((total + c2 + 1) / c2))
    return q + prior * explore / (1.0 + counts)


def _selection_q(tree: SearchTree, n: np.ndarray, q: np.ndarray, qbar: float, normalize: bool) -> np.ndarray:
    q = np.where(n > 0, q, qbar)
    return tree.normalize(q) if normalize else q


def root_q(tree: SearchTree, node: int, qbar: float, normalize: bool) -> np.ndarray:
    """Selection Q of every child: the mean if visited, else ``qbar``; optionally min-max normalized."""
    n, q, _ = tree.child_arrays(node)
    return _selection_q(tree, n, q, qbar, normalize)


def _select(tree: SearchTree, node: int, qbar: float, config: SearchConfig, counts=None) -> int:
    n, q, p = tree.child_arrays(node)
    return _argmax_puct(tree, n, q, p, qbar, config, counts)


def _argmax_puct(tree, n, q, p, qbar, config, counts=None) -> int:
    q = _selection_q(tree, n, q, qbar, config.normalize_q)
    if counts is not None:
        n = np.asarray(counts)
    scores = puct_scores(q, p, n, int(n.sum()), config.c1, config.c2)
    return int(np.argmax(scores))


def puct_select(tree: SearchTree, node: int, config: SearchConfig, counts_override=None) -> int:
    """Index (into the node's legal actions) maximizing the P-UCT score; ties go to the lowest index."""
    tree._check(node)
    if not tree.expanded[node]:
        raise TreeError(f"node {node} is not expanded")
    if not tree.children[node]:
        raise TreeError(f"node {node} has no legal actions")
    counts = None
    if counts_override is not None:
        counts = getattr(counts_override, "counts", counts_override)
    return _select(tree, node, tree.unvisited_q_default(node), config, counts)


def _edge_value(tree: SearchTree, node: int, value: float) -> float:
    """Convert a first-player value to the perspective of the player who moved into ``node``."""
    mover = tree.mover[node]
    if mover == SINGLE or mover == FIRST:
        return value
    return -value


def _evaluate(tree: SearchTree, node: int, evaluator, rng) -> float:
    state = tree.states[node]
    evaluation = evaluator.evaluate(state, rng)
    tree.expand(node, state.legal_actions(), evaluation.priors)
    return evaluation.value


def run_iteration(tree: SearchTree, config: SearchConfig, evaluator, rng: np.random.Generator) -> None:
    """One selection/expansion/evaluation/backup pass from the root."""
    node = tree.root
    if not tree.expanded[node]:
        raise SearchError("root must be expanded before iterating")
    path = [node]
    qbar = 0.0
    while True:
        n, q, p = tree.child_arrays(node)
        qbar = default_q(n, q, qbar)
        idx = _argmax_puct(tree, n, q, p, qbar, config)
        child = tree.children[node][idx]
        path.append(child)
        if tree.terminal[child]:
            value = tree.states[child].terminal_value(rng)
            tree.terminal_hits += 1
            break
        if tree.visit_count[child] == 0:
            state = tree.states[node].apply(tree.action[child])
            tree.states[child] = state
            if state.is_terminal():
                tree.terminal[child] = True
                value = state.terminal_value(rng)
                tree.terminal_hits += 1
            else:
                value = _evaluate(tree, child, evaluator, rng)
                tree.evaluations += 1
            break
        node = child
    tree.backpropagate(path, _edge_value(tree, child, value), tree.two_player, config.discount)


def apply_root_noise(tree: SearchTree, config: SearchConfig, rng: np.random.Generator) -> None:
    """Mix Dirichlet noise into the root priors: (1 - f) P + f d."""
    root = tree.root
    if not tree.expanded[root]:
        raise TreeError("root must be expanded before adding noise")
    kids = tree.children[root]
    f = config.noise_fraction
    if f == 0 or not kids:
        return
    alpha = config.dirichlet_alpha
    if config.reference_legal_moves:
        alpha = alpha * config.reference_legal_moves / len(kids)
    d = rng.dirichlet(np.full(len(kids), alpha))
    for c, di in zip(kids, d):
        tree.prior[c] = (1 - f) * tree.prior[c] + f * float(di)


def sample_action(policy: Policy, move_index: int, temperature_moves: int, rng: np.random.Generator) -> int:
    """Sample from the policy for the first ``temperature_moves`` moves, else take the argmax."""
    if not policy.support:
        raise SearchError("cannot choose from an empty policy")
    if move_index < temperature_moves:
        p = policy.probabilities
        return policy.support[int(rng.choice(len(p), p=p / p.sum()))]
    return policy.argmax()


def should_resign(tree: SearchTree, threshold: float | None = -0.9) -> bool:
    """True when the best visited root child's raw mean is below ``threshold``."""
    if threshold is None:
        return False
    visited = [tree.mean(c) for c in tree.children[tree.root] if tree.visit_count[c] > 0]
    if not visited:
        raise TreeError("no visited root child")
    return max(visited) < threshold


def start_search(state, evaluator, config: SearchConfig) -> tuple[SearchTree, np.random.Generator]:
    """Fresh tree with the root evaluated (and noised if configured)."""
    if state.is_terminal():
        raise SearchError("cannot search a terminal state")
    rng = np.random.default_rng(config.seed)
    tree = SearchTree(state)
    tree.two_player = config.two_player and state.two_player
    value = _evaluate(tree, tree.root, evaluator, rng)
    tree.backpropagate([tree.root], _edge_value(tree, tree.root, value), tree.two_player, config.discount)
    if config.root_noise:
        apply_root_noise(tree, config, rng)
    return tree, rng


def finish(tree: SearchTree, rng, policy: Policy, config: SearchConfig, k: int, **extra) -> SearchOutcome:
    rng_state = rng.bit_generator.state
    state = tree.states[tree.root]
    chosen = sample_action(policy, state.move_number, config.temperature_moves, rng)
    resigned = tree.two_player and should_resign(tree, config.resign_threshold)
    return SearchOutcome(policy, chosen, k, resigned=resigned, tree=tree, rng_state=rng_state, **extra)


def root_policy(tree: SearchTree) -> Policy:
    counts = tree.root_counts()
    return Policy.from_counts(counts, tree.actions[tree.root], int(counts.sum()))


def search_vanilla(state, evaluator, config: SearchConfig) -> SearchOutcome:
    """Exactly ``config.budget`` iterations; the policy is the root visit distribution."""
    tree, rng = start_search(state, evaluator, config)
    for _ in range(config.budget):
        run_iteration(tree, config, evaluator, rng)
    return finish(tree, rng, root_policy(tree), config, config.budget)
