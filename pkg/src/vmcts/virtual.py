"""Virtual expansion, the VET termination rule and the V-MCTS driver.

Virtual expansion plays the remaining ``N - k`` root selections on scratch
counts with every Q frozen, so no state is evaluated and the tree is left
untouched. Comparing the virtually expanded policy at ``k`` with the one at
``k // 2`` tells the driver when further search is unlikely to move the
final visit distribution.
"""

from __future__ import annotations

import copy
import math
import time
from dataclasses import dataclass, field

import numpy as np

from vmcts.search import (
    Policy,
    SearchConfig,
    SearchError,
    SearchOutcome,
    finish,
    puct_scores,
    root_policy,
    root_q,
    run_iteration,
    search_vanilla,
    start_search,
)
from vmcts.tree import SearchTree, TreeError

L1 = "l1"
L2 = "l2"


@dataclass(frozen=True)
class VetConfig:
    min_ratio: float = 0.2
    epsilon: float = 0.1
    norm: str = L1
    check_every: int = 1

    def __post_init__(self):
        if not 0 < self.min_ratio < 1:
            raise ValueError("min_ratio must lie in (0, 1)")
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        if self.norm not in (L1, L2):
            raise ValueError(f"norm must be {L1!r} or {L2!r}")
        if self.check_every < 1:
            raise ValueError("check_every must be positive")

    def min_iterations(self, budget: int) -> int:
        return max(1, math.ceil(self.min_ratio * budget - 1e-12))


@dataclass
class VirtualRootCounts:
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass
class PolicySnapshotLog:
    """Virtually expanded root policies keyed by the iteration that produced them."""

    snapshots: dict[int, np.ndarray] = field(default_factory=dict)

    def record(self, k: int, probabilities: np.ndarray) -> None:
        self.snapshots[k] = probabilities

    def __contains__(self, k: int) -> bool:
        return k in self.snapshots

    def at_or_below(self, j: int) -> np.ndarray | None:
        """Snapshot at ``j``, or the latest one before it (``None`` if there is none >= 1)."""
        while j >= 1:
            if j in self.snapshots:
                return self.snapshots[j]
            j -= 1
        return None


def policy_distance(p: np.ndarray, q: np.ndarray, norm: str = L1) -> float:
    d = p - q
    if norm == L1:
        return float(np.abs(d).sum())
    return float(np.sqrt((d * d).sum()))


def virtual_expand(tree: SearchTree, config: SearchConfig, budget: int | None = None) -> VirtualRootCounts:
    """Scratch root counts after topping the real ones up to ``budget`` with frozen-Q selections."""
    budget = config.budget if budget is None else budget
    root = tree.root
    if not tree.expanded[root]:
        raise TreeError("root must be expanded")
    counts = tree.root_counts()
    k = int(counts.sum())
    if k > budget:
        raise TreeError(f"tree already holds {k} iterations, more than the budget {budget}")
    q = root_q(tree, root, tree.unvisited_q_default(root), config.normalize_q)
    _, _, prior = tree.child_arrays(root)
    c1, c2 = config.c1, config.c2
    for total in range(k, budget):
        scores = puct_scores(q, prior, counts, total, c1, c2)
        counts[int(np.argmax(scores))] += 1
    return VirtualRootCounts(counts)


def virtual_policy(counts: VirtualRootCounts, budget: int, support=None) -> Policy:
    if counts.total != budget:
        raise ValueError(f"virtual counts total {counts.total}, expected {budget}")
    if support is None:
        support = tuple(range(len(counts.counts)))
    return Policy.from_counts(counts.counts, support, budget)


def vet_check(log: PolicySnapshotLog, k: int, vet: VetConfig, budget: int) -> bool:
    """k >= ceil(r N) and ||pi_hat_k - pi_hat_{k//2}|| < epsilon (strict)."""
    if k not in log:
        raise KeyError(f"no snapshot at iteration {k}")
    half = log.at_or_below(k // 2)
    if half is None:
        raise KeyError(f"no snapshot at or below iteration {k // 2}")
    if k < vet.min_iterations(budget):
        return False
    return policy_distance(log.snapshots[k], half, vet.norm) < vet.epsilon


def search_vmcts(state, evaluator, config: SearchConfig, vet: VetConfig,
                 record_trace: bool = True) -> SearchOutcome:
    """Search that may stop once the virtually expanded policy settles.

    Returns the virtually expanded policy at the stopping iteration, or the
    full-budget visit distribution when the rule never fires.
    """
    budget = config.budget
    tree, rng = start_search(state, evaluator, config)
    support = tree.actions[tree.root]
    log = PolicySnapshotLog()
    trace: list[dict] | None = [] if record_trace else None
    k_min = vet.min_iterations(budget)
    for k in range(1, budget + 1):
        run_iteration(tree, config, evaluator, rng)
        if k % vet.check_every and k != budget:
            continue
        t0 = time.perf_counter_ns()
        counts = virtual_expand(tree, config, budget)
        elapsed = time.perf_counter_ns() - t0
        pi_hat = counts.counts / budget
        log.record(k, pi_hat)
        half = log.at_or_below(k // 2)
        d1 = d2 = None
        stop = False
        if half is not None:
            d1 = policy_distance(pi_hat, half, L1)
            d2 = policy_distance(pi_hat, half, L2)
            dist = d1 if vet.norm == L1 else d2
            stop = k >= k_min and dist < vet.epsilon and k < budget
        if trace is not None:
            trace.append({"k": k, "delta_l1": d1, "delta_l2": d2,
                          "virtual_time_ns": elapsed, "terminated": stop})
        if stop:
            policy = Policy.from_counts(counts.counts, support, budget)
            return finish(tree, rng, policy, config, k, terminated_early=True, trace=trace)
    return finish(tree, rng, root_policy(tree), config, budget, trace=trace)


def greedy_expand(tree: SearchTree, budget: int) -> Policy:
    """Spend the remaining ``budget - k`` visits on the current most-visited root action."""
    counts = tree.root_counts()
    k = int(counts.sum())
    if k > budget:
        raise TreeError(f"tree already holds {k} iterations, more than the budget {budget}")
    counts[int(np.argmax(counts))] += budget - k
    return Policy.from_counts(counts, tree.actions[tree.root], budget)


def _truncated(state, evaluator, config: SearchConfig, k_stop: int):
    if not 1 <= k_stop <= config.budget:
        raise SearchError(f"k_stop must lie in [1, {config.budget}]")
    tree, rng = start_search(state, evaluator, config)
    for _ in range(k_stop):
        run_iteration(tree, config, evaluator, rng)
    return tree, rng


def truncated_vanilla(state, evaluator, config: SearchConfig, k_stop: int) -> SearchOutcome:
    """Stop after ``k_stop`` iterations and return the raw visit distribution."""
    tree, rng = _truncated(state, evaluator, config, k_stop)
    return finish(tree, rng, root_policy(tree), config, k_stop, terminated_early=k_stop < config.budget)


def truncated_greedy(state, evaluator, config: SearchConfig, k_stop: int) -> SearchOutcome:
    tree, rng = _truncated(state, evaluator, config, k_stop)
    return finish(tree, rng, greedy_expand(tree, config.budget), config, k_stop,
                  terminated_early=k_stop < config.budget)


def truncated_virtual(state, evaluator, config: SearchConfig, k_stop: int) -> SearchOutcome:
    tree, rng = _truncated(state, evaluator, config, k_stop)
    counts = virtual_expand(tree, config, config.budget)
    policy = Policy.from_counts(counts.counts, tree.actions[tree.root], config.budget)
    return finish(tree, rng, policy, config, k_stop, terminated_early=k_stop < config.budget)


def continue_to_oracle(outcome: SearchOutcome, evaluator, config: SearchConfig) -> Policy:
    """Full-budget visit distribution reached by continuing a copy of the stopped search.

    The copy resumes the random stream where the search left off, so the
    result matches what an uninterrupted vanilla search would have produced.
    The original tree is not modified.
    """
    if outcome.tree is None:
        raise SearchError("outcome carries no tree")
    tree = outcome.tree.clone()
    rng = np.random.default_rng()
    rng.bit_generator.state = copy.deepcopy(outcome.rng_state)
    k = int(tree.root_counts().sum())
    if k > config.budget:
        raise SearchError("tree holds more iterations than the budget")
    for _ in range(config.budget - k):
        run_iteration(tree, config, evaluator, rng)
    return root_policy(tree)


__all__ = [
    "L1", "L2", "PolicySnapshotLog", "VetConfig", "VirtualRootCounts", "continue_to_oracle",
    "greedy_expand", "policy_distance", "search_vanilla", "search_vmcts", "truncated_greedy",
    "truncated_vanilla", "truncated_virtual", "vet_check", "virtual_expand", "virtual_policy",
]
