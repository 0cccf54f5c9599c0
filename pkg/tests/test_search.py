import numpy as np
import pytest

from vmcts.envs import BanditState, MNKState
from vmcts.evaluators import BanditEvaluator, MinimaxEvaluator, RolloutEvaluator
from vmcts.search import (
    Policy, SearchConfig, SearchError, apply_root_noise, puct_scores, puct_select, sample_action,
    search_vanilla, should_resign, start_search,
)
from vmcts.tree import SearchTree, TreeError

RAW = SearchConfig(normalize_q=False)


def two_arm_tree(priors, counts, means):
    tree = SearchTree(BanditState((0.5, 0.5)))
    tree.expand(0, [0, 1], priors)
    for c, n, q in zip(tree.children[0], counts, means):
        tree.visit_count[c] = n
        tree.value_sum[c] = n * q
    tree.visit_count[0] = 1 + sum(counts)
    return tree


def test_puct_prefers_visited_high_value_arm():
    tree = two_arm_tree([0.5, 0.5], [1, 0], [1.0, 0.0])
    assert tree.unvisited_q_default(0) == 0.5
    explore = 1.25 + np.log((1 + 19652 + 1) / 19652)
    assert 1.0 + 0.5 * explore / 2 == pytest.approx(1.3125, abs=1e-4)
    assert 0.5 + 0.5 * explore == pytest.approx(1.125, abs=1e-4)
    assert puct_select(tree, 0, RAW) == 0


def test_puct_tie_goes_to_lowest_index():
    tree = two_arm_tree([0.5, 0.5], [2, 2], [0.3, 0.3])
    assert puct_select(tree, 0, RAW) == 0
    assert puct_select(two_arm_tree([0.5, 0.5], [0, 0], [0, 0]), 0, RAW) == 0


def test_puct_zero_prior_arm_wins_on_value():
    tree = two_arm_tree([1.0, 0.0], [1, 1], [0.0, 1.0])
    scores = puct_scores(np.array([0.0, 1.0]), np.array([1.0, 0.0]), np.array([1, 1]), 2, 1.25, 19652)
    assert scores[0] == pytest.approx(0.884, abs=1e-3)
    assert puct_select(tree, 0, RAW) == 1


def test_puct_select_uses_counts_override():
    tree = two_arm_tree([0.5, 0.5], [1, 1], [0.5, 0.5])
    assert puct_select(tree, 0, RAW, counts_override=np.array([5, 0])) == 1


def test_puct_select_requires_expanded_node():
    tree = SearchTree(BanditState((0.5, 0.5)))
    with pytest.raises(TreeError):
        puct_select(tree, 0, RAW)


def noised_priors(f, alpha, n=2, seed=0):
    config = SearchConfig(noise_fraction=f, dirichlet_alpha=alpha)
    tree = SearchTree(BanditState(tuple([0.5] * n)))
    tree.expand(0, list(range(n)), [1.0 / n] * n)
    apply_root_noise(tree, config, np.random.default_rng(seed))
    return np.array([tree.prior[c] for c in tree.children[0]])


def test_noise_zero_fraction_is_identity():
    assert np.array_equal(noised_priors(0.0, 0.3), [0.5, 0.5])


def test_noise_full_fraction_is_a_dirichlet_draw():
    p = noised_priors(1.0, 0.3, seed=4)
    assert p.sum() == pytest.approx(1.0)
    assert np.allclose(p, np.random.default_rng(4).dirichlet([0.3, 0.3]))


def test_noise_large_alpha_keeps_uniform():
    assert np.allclose(noised_priors(0.25, 1e6, n=5), 0.2, atol=1e-3)


def test_noise_alpha_scaled_by_legal_move_ratio():
    config = SearchConfig(noise_fraction=1.0, dirichlet_alpha=0.03, reference_legal_moves=100)
    tree = SearchTree(BanditState((0.5, 0.5)))
    tree.expand(0, [0, 1], [0.5, 0.5])
    apply_root_noise(tree, config, np.random.default_rng(9))
    assert np.allclose([tree.prior[1], tree.prior[2]], np.random.default_rng(9).dirichlet([1.5, 1.5]))


def test_sample_action():
    rng = np.random.default_rng(0)
    assert sample_action(Policy(np.array([0.3, 0.7]), (1, 2)), 0, 0, rng) == 2
    assert all(sample_action(Policy(np.array([1.0, 0.0]), (1, 2)), 3, 16, rng) == 1 for _ in range(100))
    p = Policy(np.array([0.25, 0.75]), (1, 2))
    draws = [sample_action(p, 3, 16, rng) for _ in range(10_000)]
    assert 0.72 <= np.mean(np.array(draws) == 2) <= 0.78
    with pytest.raises(SearchError):
        sample_action(Policy(np.array([]), ()), 0, 0, rng)


def test_should_resign():
    assert should_resign(two_arm_tree([0.5, 0.5], [1, 1], [-0.95, -0.95]))
    assert not should_resign(two_arm_tree([0.5, 0.5], [1, 1], [-0.95, 0.0]))
    assert not should_resign(two_arm_tree([0.5, 0.5], [1, 1], [-0.95, -0.95]), None)


def test_policy_validation():
    with pytest.raises(ValueError):
        Policy(np.array([0.5, 0.6]), (0, 1))
    with pytest.raises(ValueError):
        Policy(np.array([1.0]), (0, 1))


def test_config_validation():
    for bad in ({"budget": 1}, {"c1": 0}, {"discount": 0}, {"resign_threshold": 0.5}):
        with pytest.raises(ValueError):
            SearchConfig(**bad)


@pytest.mark.parametrize("seed", range(4))
def test_vanilla_accounting(seed):
    state = MNKState.gomoku(7).apply(24)
    config = SearchConfig(budget=60, seed=seed)
    out = search_vanilla(state, RolloutEvaluator(4), config)
    counts = out.tree.root_counts()
    assert counts.sum() == 60 and out.iterations_used == 60 and not out.terminated_early
    assert np.array_equal(out.policy.probabilities, counts / 60)
    assert out.tree.evaluations + out.tree.terminal_hits == 60


def test_vanilla_is_deterministic():
    state = MNKState.gomoku(7)
    a = search_vanilla(state, RolloutEvaluator(4), SearchConfig(budget=40, seed=5))
    b = search_vanilla(state, RolloutEvaluator(4), SearchConfig(budget=40, seed=5))
    assert a.tree.snapshot() == b.tree.snapshot()
    assert a.chosen_action == b.chosen_action


def test_noise_free_argmax_stability():
    state = MNKState.tictactoe().apply(0).apply(4)
    picks = {search_vanilla(state, MinimaxEvaluator(), SearchConfig(budget=50, seed=s)).chosen_action
             for s in range(4)}
    assert len(picks) == 1


def test_finds_immediate_win():
    s = MNKState.tictactoe()
    for a in (0, 3, 1, 4):
        s = s.apply(a)
    out = search_vanilla(s, RolloutEvaluator(8), SearchConfig(budget=100))
    assert out.chosen_action == 2


def test_terminal_state_rejected():
    s = MNKState.tictactoe()
    for a in (0, 3, 1, 4, 2):
        s = s.apply(a)
    with pytest.raises(SearchError):
        search_vanilla(s, RolloutEvaluator(1), SearchConfig())


def test_bandit_search_prefers_best_arm():
    config = SearchConfig(budget=150, two_player=False, normalize_q=False, resign_threshold=None)
    out = search_vanilla(BanditState((0.9, 0.5, 0.1), "bernoulli"), BanditEvaluator(), config)
    assert out.chosen_action == 0


def test_root_visit_includes_root_evaluation():
    config = SearchConfig(budget=10)
    tree, _ = start_search(MNKState.tictactoe(), RolloutEvaluator(1), config)
    assert tree.visit_count[0] == 1 and tree.evaluations == 0
