"""End-to-end acceptance checks; each records one pass/fail line in the terminal summary.

Run alone with ``pytest tests/test_acceptance.py -v``; the Gomoku matches
dominate the runtime (roughly a quarter of an hour on one core).
"""

import time

import numpy as np
import pytest

from vmcts import theory
from vmcts.cli import main
from vmcts.envs import BanditState, MNKState
from vmcts.evaluators import BanditEvaluator, Evaluation, RolloutEvaluator
from vmcts.match import EngineSpec, MatchSpec, run_match, summarize
from vmcts.search import SearchConfig, run_iteration, search_vanilla, start_search
from vmcts.seeding import derive_seed
from vmcts.theory import TheoryConfig
from vmcts.virtual import VetConfig, search_vmcts, virtual_expand

pytestmark = pytest.mark.slow

FIVE_ARMS = BanditState((0.9, 0.7, 0.4, 0.25, 0.1), "uniform")


def random_gomoku(seed, max_plies=10):
    rng = np.random.default_rng(seed)
    s = MNKState.gomoku(7)
    for _ in range(rng.integers(0, max_plies + 1)):
        legal = s.legal_actions()
        nxt = s.apply(legal[rng.integers(len(legal))])
        if nxt.is_terminal():
            break
        s = nxt
    return s


class NoisyEvaluator:
    """Random Dirichlet priors and uniform values: cheap, and gives trees with uneven priors."""

    def evaluate(self, state, rng):
        return Evaluation(rng.dirichlet(np.ones(len(state.legal_actions()))), float(rng.uniform(-1, 1)))


def same_outcome(a, b):
    return (a.tree.snapshot() == b.tree.snapshot()
            and np.array_equal(a.policy.probabilities, b.policy.probabilities)
            and a.policy.support == b.policy.support
            and a.chosen_action == b.chosen_action
            and a.iterations_used == b.iterations_used)


def test_1_exactness_at_zero_epsilon(criterion):
    t0 = time.perf_counter()
    vet = VetConfig(epsilon=0.0)
    mismatches = 0
    seeds = range(100)
    ttt = MNKState.tictactoe()
    for seed in seeds:
        cfg = SearchConfig(budget=50, seed=seed)
        ev = RolloutEvaluator(4)
        mismatches += not same_outcome(search_vmcts(ttt, ev, cfg, vet), search_vanilla(ttt, ev, cfg))
        bcfg = SearchConfig(budget=50, seed=seed, two_player=False, normalize_q=False, resign_threshold=None)
        bev = BanditEvaluator()
        mismatches += not same_outcome(search_vmcts(FIVE_ARMS, bev, bcfg, vet),
                                       search_vanilla(FIVE_ARMS, bev, bcfg))
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 30
    criterion(1, ok, f"exactness: {mismatches} mismatches over {2 * len(seeds)} searches, {elapsed:.1f}s (< 30s)")
    assert ok


def test_2_virtual_expansion_purity(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    impure = wrong_total = 0
    trees = 1000
    for i in range(trees):
        state = MNKState.tictactoe() if i % 2 else random_gomoku(i)
        k = int(rng.integers(1, 41))
        budget = k + int(rng.integers(0, 120))
        cfg = SearchConfig(budget=max(budget, 2), seed=i, normalize_q=bool(i % 3))
        ev = NoisyEvaluator()
        tree, g = start_search(state, ev, cfg)
        for _ in range(k):
            run_iteration(tree, cfg, ev, g)
        before = tree.snapshot()
        counts = virtual_expand(tree, cfg, cfg.budget)
        impure += tree.snapshot() != before
        wrong_total += counts.total != cfg.budget or bool((counts.counts < tree.root_counts()).any())
    elapsed = time.perf_counter() - t0
    ok = impure == 0 and wrong_total == 0 and elapsed < 10
    criterion(2, ok, f"purity: {impure} modified trees, {wrong_total} bad totals over {trees} trees, "
                     f"{elapsed:.1f}s (< 10s)")
    assert ok


def test_3_error_bound(criterion):
    t0 = time.perf_counter()
    res = theory.verify_theorem2(TheoryConfig())
    elapsed = time.perf_counter() - t0
    freq = res.empirical_frequency
    ok = freq is not None and freq >= res.theoretical_bound and freq >= 0.95 and elapsed < 300
    criterion(3, ok, f"error bound: freq {freq} vs bound {res.theoretical_bound:.8f} "
                     f"(triggered {res.details['triggered']}/1000, worst L1 {res.details['max_distance']:.3f}), "
                     f"{elapsed:.0f}s")
    assert ok


def test_4_value_consistency_best_action_lemma(criterion):
    t0 = time.perf_counter()
    cfg = TheoryConfig()
    results = [theory.verify_lemma1(cfg), theory.verify_theorem1a(cfg), theory.verify_theorem1b(cfg)]
    elapsed = time.perf_counter() - t0
    ok = all(r.passed for r in results) and results[0].empirical_frequency == 1.0 and elapsed < 300
    detail = ", ".join(f"{r.claim} {r.empirical_frequency:.4f}>={r.theoretical_bound:.6f}" for r in results)
    criterion(4, ok, f"{detail}, {elapsed:.0f}s")
    assert ok


def test_5_budget_saving_match(criterion):
    t0 = time.perf_counter()
    spec = MatchSpec(env="gomoku", size=7, engine_a=EngineSpec(expansion="vmcts", rollouts=32),
                     engine_b=EngineSpec(expansion="vanilla", rollouts=32), games=200, base_seed=0)
    records = run_match(spec)
    s = summarize(records)
    elapsed = time.perf_counter() - t0
    ok = s["avg_budget_a"] <= 0.65 * 150 and s["win_rate_a"] >= 0.40 and s["faults"] == 0 and elapsed < 1800
    criterion(5, ok, f"V-MCTS budget {s['avg_budget_a']:.1f} (<= 97.5), win rate {s['win_rate_a']:.3f} "
                     f"+- {s['win_rate_a_stderr']:.3f} (>= 0.40, draws half; W/D/L {s['wins_a']}/{s['draws']}/"
                     f"{s['wins_b']}), {elapsed / 60:.1f} min")
    assert ok


def test_6_virtual_beats_greedy_when_truncated(criterion):
    t0 = time.perf_counter()
    spec = MatchSpec(env="gomoku", size=7, engine_a=EngineSpec(expansion="virtual", rollouts=32),
                     engine_b=EngineSpec(expansion="greedy", rollouts=32), games=200, base_seed=6)
    s = summarize(run_match(spec))
    elapsed = time.perf_counter() - t0
    strict = s["wins_a"] / s["games"]
    ok = s["win_rate_a"] >= 0.60 and s["faults"] == 0 and elapsed < 1800
    criterion(6, ok, f"virtual vs greedy at k=30: win rate {s['win_rate_a']:.3f} (>= 0.60, draws half; "
                     f"wins only {strict:.3f}; W/D/L {s['wins_a']}/{s['draws']}/{s['wins_b']}), "
                     f"{elapsed / 60:.1f} min")
    assert ok


def test_7_overhead_is_linear(criterion):
    state = random_gomoku(7)
    cfg = SearchConfig(budget=150, seed=7)
    ev = RolloutEvaluator(8)
    tree, g = start_search(state, ev, cfg)
    for _ in range(30):
        run_iteration(tree, cfg, ev, g)
    steps = np.array([30, 60, 90, 120])
    times = []
    for t in steps:
        samples = []
        for _ in range(200):
            t0 = time.perf_counter_ns()
            virtual_expand(tree, cfg, 30 + int(t))
            samples.append(time.perf_counter_ns() - t0)
        times.append(np.median(samples))
    times = np.array(times, dtype=float)
    slope, intercept = np.polyfit(steps, times, 1)
    pred = slope * steps + intercept
    r2 = 1 - ((times - pred) ** 2).sum() / ((times - times.mean()) ** 2).sum()
    ok = r2 >= 0.95 and slope > 0
    ms = ", ".join(f"T={t}: {v / 1e6:.3f} ms" for t, v in zip(steps, times))
    criterion(7, ok, f"virtual expansion time {ms}; linear R^2 {r2:.4f} (>= 0.95)")
    assert ok


def test_8_adaptivity(criterion):
    t0 = time.perf_counter()
    cfg = TheoryConfig(trials=500, arm_means=theory.EASY_ARMS)
    probe = theory.adaptivity_probe(BanditState(theory.EASY_ARMS, "uniform"),
                                    BanditState(theory.HARD_ARMS, "uniform"), cfg, epsilon=0.1)
    elapsed = time.perf_counter() - t0
    ok = probe["easy_mean"] < probe["hard_mean"] and probe["p_value"] < 0.05
    criterion(8, ok, f"mean stop k easy {probe['easy_mean']:.1f} vs hard {probe['hard_mean']:.1f}, "
                     f"one-sided Welch p {probe['p_value']:.3g} (< 0.05), {elapsed:.0f}s")
    assert ok


def test_9_budget_monotone_in_epsilon(criterion):
    grid = (0.0, 0.05, 0.1, 0.2, 0.5)
    positions = [random_gomoku(derive_seed(9, i)) for i in range(50)]
    per_eps = []
    per_seed_violations = 0
    for i, s in enumerate(positions):
        cfg = SearchConfig(budget=150, seed=derive_seed(9, i, 1))
        used = [search_vmcts(s, RolloutEvaluator(32), cfg, VetConfig(epsilon=e), record_trace=False).iterations_used
                for e in grid]
        per_seed_violations += any(b > a for a, b in zip(used, used[1:]))
        per_eps.append(used)
    means = np.mean(per_eps, axis=0)
    ok = all(b <= a for a, b in zip(means, means[1:]))
    criterion(9, ok, "mean budget by eps " + ", ".join(f"{e}: {m:.1f}" for e, m in zip(grid, means))
              + f" (non-increasing; per-position violations {per_seed_violations})")
    assert ok


def test_10_match_csv_reproducible(criterion, tmp_path):
    args = ["match", "--env", "gomoku", "--size", "7", "--n", "40", "--rollouts", "8", "--games", "6",
            "--seed", "10"]
    assert main([*args, "--out-dir", str(tmp_path / "a")]) == 0
    assert main([*args, "--out-dir", str(tmp_path / "b"), "--workers", "2"]) == 0
    a = (tmp_path / "a" / "match.csv").read_bytes()
    b = (tmp_path / "b" / "match.csv").read_bytes()
    ok = a == b and len(a.splitlines()) == 7
    criterion(10, ok, f"match CSV byte-identical across a serial and a 2-worker run ({len(a)} bytes)")
    assert ok
