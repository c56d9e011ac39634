import random

import pytest

from cibmpe.belief import belief_update_general, increment_distribution
from cibmpe.independence import FAIL, INCONCLUSIVE, PASS, check_strategy_independence

from support import fixture, random_game, random_global_local


@pytest.mark.parametrize("name", ["example_sec4d.game", "example_sec4d_T4.game", "uncontrolled.game",
                                  "global_local_noiseless.game", "global_local_noisy.game", "symmetric.game",
                                  "single_controller_delay_a.game", "single_controller_delay_b.game",
                                  "one_directional_one_step.game"])
def test_builtin_fixtures_pass(name):
    g, s = fixture(name)
    report = check_strategy_independence(g, s)
    assert report.status == PASS and report.passed
    assert report.witness is None
    assert len(report.beliefs_per_stage) == g.horizon


def test_two_step_delay_fails_with_a_checked_witness():
    g, s = fixture("two_step_delay.game")
    assert not s.claims_assumption_2
    report = check_strategy_independence(g, s)
    assert report.status == FAIL
    w = report.witness
    assert w.posterior_a != w.posterior_b
    for pair, post in ((w.pair_a, w.posterior_a), (w.pair_b, w.posterior_b)):
        assert increment_distribution(g, s, w.belief, *pair)[w.z] > 0
        assert belief_update_general(g, s, w.belief, *pair, w.z) == post
    text = report.render(g, s)
    assert text.startswith("independence fail") and "pair A" in text and "posterior B" in text


@pytest.mark.parametrize("noisy", [False, True])
def test_global_local_with_correlated_prior_fails(noisy):
    for seed in range(3):
        g, s = random_global_local(random.Random(seed), noisy, correlated=True)
        report = check_strategy_independence(g, s)
        assert report.status == FAIL
        w = report.witness
        for pair, post in ((w.pair_a, w.posterior_a), (w.pair_b, w.posterior_b)):
            assert belief_update_general(g, s, w.belief, *pair, w.z) == post


def test_budgets_give_inconclusive():
    g, s = fixture("example_sec4d_T4.game")
    report = check_strategy_independence(g, s, budget=2)
    assert report.status == INCONCLUSIVE and not report.passed
    assert report.frontier == 3 and "budget" in report.message
    report = check_strategy_independence(g, s, pair_budget=1)
    assert report.status == INCONCLUSIVE


def test_behavioral_samples_agree_on_independent_structures():
    rng = random.Random(5)
    for _ in range(10):
        g, s = random_game(rng)
        report = check_strategy_independence(g, s, behavioral_samples=3, seed=7)
        assert report.status == PASS
        assert report.behavioral_samples == 3
        assert "behavioral samples per belief 3" in report.render(g, s)


def test_behavioral_samples_find_two_step_failure_too():
    g, s = fixture("two_step_delay.game")
    assert check_strategy_independence(g, s, behavioral_samples=5).status == FAIL


def test_report_is_independent_of_workers():
    g, s = fixture("example_sec4d_T4.game")
    a = check_strategy_independence(g, s, workers=1)
    b = check_strategy_independence(g, s, workers=3)
    assert a.render(g, s) == b.render(g, s)
    assert a.beliefs_per_stage == [1, 3, 3, 3]
