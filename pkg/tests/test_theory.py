import math

import pytest

from vmcts import theory
from vmcts.envs import BanditState
from vmcts.theory import (
    FAIL, INCONCLUSIVE, PASS, TheoryConfig, adaptivity_probe, bound_best_action, bound_error,
    bound_value_consistency, epsilon_k,
)

# reference values from 40-digit arithmetic (mpmath)
EPS_1_D001 = 2.14596602628934723963618357029
EPS_1_D1 = 1.51742712938514660845948862688
EPS_30_D01 = 0.478019351810267
EPS_150_D01 = 0.237550176223710
T1A = 0.99996979686857
T1B = 0.99999484289972
T2 = 0.99987797934903


def test_epsilon_reference_values():
    assert epsilon_k(1, 0.01) == pytest.approx(EPS_1_D001, abs=1e-12)
    assert epsilon_k(30, 0.1) == pytest.approx(EPS_30_D01, abs=1e-12)
    assert epsilon_k(150, 0.1) == pytest.approx(EPS_150_D01, abs=1e-12)
    # delta -> 1 limit
    assert epsilon_k(1, 1 - 1e-15) == pytest.approx(EPS_1_D1, abs=1e-12)


def test_epsilon_decreasing():
    for delta in (0.01, 0.1, 0.9):
        for k in range(1, 300):
            assert epsilon_k(2 * k, delta) < epsilon_k(k, delta)


def test_epsilon_domain():
    with pytest.raises(ValueError):
        epsilon_k(0, 0.1)
    with pytest.raises(ValueError):
        epsilon_k(1, 1.0)


def test_bound_reference_values():
    assert bound_value_consistency(150, 0.2, 0.1, 5) == pytest.approx(T1A, abs=1e-12)
    assert bound_best_action(30, 150, 0.1) == pytest.approx(T1B, abs=1e-12)
    assert bound_error(150, 0.2, 0.1, 5) == pytest.approx(T2, abs=1e-12)


def test_config_validation():
    with pytest.raises(ValueError):
        TheoryConfig(trials=50)
    with pytest.raises(ValueError):
        TheoryConfig(arm_means=(0.1, 0.9))
    with pytest.raises(ValueError):
        TheoryConfig(arm_priors=(0.5, 0.5))
    assert TheoryConfig().k == 30


SMALL = TheoryConfig(budget=50, trials=100, seed=4)


def test_degenerate_bandit_value_consistency_is_certain():
    cfg = TheoryConfig(arm_means=(1.0, 0.0), reward_law="bernoulli", budget=20, trials=100)
    res = theory.verify_theorem1a(cfg)
    assert res.empirical_frequency == 1.0 and res.status == PASS


def test_lemma_and_value_consistency_small():
    # k = 10 is below the regime where every arm is reliably tried, so only the bookkeeping is checked
    lemma = theory.verify_lemma1(SMALL)
    assert 0.0 < lemma.empirical_frequency <= 1.0
    assert (lemma.status == PASS) == (lemma.empirical_frequency == 1.0)
    res = theory.verify_theorem1a(SMALL)
    assert res.epsilon_k == pytest.approx(epsilon_k(10, 0.1))
    assert res.status in (PASS, FAIL)


def test_status_is_pass_iff_frequency_meets_bound():
    for res in (theory.verify_theorem1a(SMALL), theory.verify_theorem1b(SMALL), theory.verify_theorem2(SMALL)):
        if res.empirical_frequency is not None:
            assert (res.status == PASS) == (res.empirical_frequency >= res.theoretical_bound)


def test_theorem2_without_triggers_is_inconclusive():
    res = theory.verify_theorem2(SMALL, epsilon=0.0)
    assert res.status == INCONCLUSIVE and res.details["trigger_rate"] == 0.0


def test_reports_are_reproducible():
    a = theory.run_all(SMALL, include_adaptivity=False)
    b = theory.run_all(SMALL, include_adaptivity=False)
    assert a == b


def test_adaptivity_direction_small():
    cfg = TheoryConfig(budget=50, trials=100)
    probe = adaptivity_probe(BanditState(theory.EASY_ARMS, "uniform"), BanditState(theory.HARD_ARMS, "uniform"), cfg)
    assert probe["easy_mean"] < probe["hard_mean"]
    assert math.isfinite(probe["p_value"])
