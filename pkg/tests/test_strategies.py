import dataclasses
import math

import numpy as np
import pytest

from matchsim import (EnumerationCapError, LedgerIncompleteError, MTBB,
                      NoiseModel, PaymentRule, StochasticMTBB,
                      counterexample_instance, derived_constants,
                      enumerate_payoff_relevant_strategies, generate_instance,
                      mtbb_profile, run_fili, run_iili, stochastic_mtbb_profile)
from matchsim.strategies import rank_by_value
from conftest import make_homogeneous_instance


def feed_assessment(strategy, instance, payment):
    """Walk the strategy through the rotation so its ledger is complete."""
    n = instance.n_workers
    i = strategy.worker
    for t in range(n):
        task = (t + i) % n
        e = strategy.effort(t, "assessment", task)
        pay = payment.settle(instance.productivity[i, task] * e,
                             instance.quality[task])
        strategy.observe(t, "assessment", task, pay,
                         instance.cost[i, task] * e * e)


class TestMTBB:
    def test_counterexample_worker1_ledger_and_report(self, counterexample,
                                                      counterexample_payment):
        s = MTBB.for_instance(counterexample, 1)
        feed_assessment(s, counterexample, counterexample_payment)
        assert s.ledger.utility(0) == pytest.approx(50.0 / 12.0 - 1.0)
        assert s.ledger.utility(1) == pytest.approx(16.0 / 12.0 - 2.0)
        assert s.report() == (0, 1)
        assert s.effort(5, "operational", 1) == 0.0  # negative margin
        assert s.effort(5, "operational", 0) == 1.0

    def test_zero_margin_means_zero_effort(self):
        # alpha*F^2*g == C exactly: U = 0, strict rule says do not work
        inst = make_homogeneous_instance([1.0], [1.0], [2.0])
        s = MTBB.for_instance(inst, 0)
        feed_assessment(s, inst, PaymentRule.quadratic(0.5))
        assert s.ledger.utility(0) == 0.0
        assert s.effort(2, "operational", 0) == 0.0

    def test_assessment_is_maximal(self, counterexample):
        s = MTBB.for_instance(counterexample, 0)
        assert s.effort(0, "assessment", 1) == counterexample.max_effort[0, 1]
        assert s.effort(2, "reporting", 0) == counterexample.max_effort[0, 0]

    def test_report_before_full_rotation_raises(self, counterexample):
        s = MTBB.for_instance(counterexample, 0)
        s.observe(0, "assessment", 0, 1.0, 0.5)
        with pytest.raises(LedgerIncompleteError):
            s.report()

    def test_tie_rule_orders_by_quality_then_low_index(self):
        assert rank_by_value([0.0, 0.0, 0.0], [1.0, 3.0, 2.0]) == (1, 2, 0)
        assert rank_by_value([0.0, 0.0], [2.0, 2.0]) == (0, 1)
        inst = make_homogeneous_instance([2.0, 3.0], [1.0, 0.5], [2.0, 2.0])
        profile = mtbb_profile(inst)
        for s in profile:
            for t in range(2):
                s.observe(t, "assessment", (t + s.worker) % 2, 1.5, 1.5)
        assert profile[0].report() == (0, 1)  # all-zero utilities, equal quality

    def test_truthful_report_matches_margin_ranking(self, paper_generation_config):
        for seed in range(20):
            inst = generate_instance(
                dataclasses.replace(paper_generation_config, n_workers=4, seed=seed))
            alpha = derived_constants(inst).alpha_star
            payment = PaymentRule.quadratic(alpha)
            for i in range(inst.n_workers):
                s = MTBB.for_instance(inst, i)
                feed_assessment(s, inst, payment)
                margins = [(alpha * inst.productivity[i, x] ** 2 * inst.quality[x]
                            - inst.cost[i, x]) * inst.max_effort[i, x] ** 2
                           for x in range(inst.n_workers)]
                assert s.report() == rank_by_value(margins, inst.quality)

    def test_efforts_stay_on_grid(self, counterexample, counterexample_payment):
        s = MTBB.for_instance(counterexample, 1)
        feed_assessment(s, counterexample, counterexample_payment)
        for t, phase, task in [(0, "assessment", 0), (2, "reporting", 1),
                               (3, "operational", 0), (3, "operational", 1)]:
            assert counterexample.on_grid(1, task, s.effort(t, phase, task))


class TestStochasticMTBB:
    def test_zero_variance_single_slot_equals_deterministic(self, counterexample,
                                                            counterexample_payment):
        alpha = counterexample_payment.alpha
        noise = NoiseModel.constant(2, 0.0, seed=0)
        det = run_fili(counterexample, counterexample_payment,
                       mtbb_profile(counterexample), horizon=8)
        sto = run_iili(counterexample, noise,
                       PaymentRule.stochastic_quadratic(alpha),
                       stochastic_mtbb_profile(counterexample, alpha),
                       horizon=8, sub_phase_length=1)
        assert det.final_matching.assignment == sto.final_matching.assignment
        assert det.reports == sto.reports
        det_ops = [(r.worker, r.effort) for r in det.trace.records
                   if r.phase == "operational"]
        sto_ops = [(r.worker, r.effort) for r in sto.trace.records
                   if r.phase == "operational"]
        assert det_ops[:2] == sto_ops[:2]

    def test_report_matches_recomputed_estimates(self):
        inst = make_homogeneous_instance([4.0, 5.0], [0.5, 0.4], [2.0, 3.0])
        alpha = derived_constants(inst).alpha_star
        noise = NoiseModel.constant(2, 1.0, seed=17)
        res = run_iili(inst, noise, PaymentRule.stochastic_quadratic(alpha),
                       stochastic_mtbb_profile(inst, alpha),
                       horizon=30, sub_phase_length=3)
        for i in range(2):
            sums = np.zeros(2)
            counts = np.zeros(2)
            for r in res.trace.records:
                if r.worker == i and r.phase == "assessment":
                    sums[r.task] += r.revenue
                    counts[r.task] += 1
            f_hat = sums / counts / (inst.quality * inst.max_effort[i])
            margins = [(alpha * f_hat[x] ** 2 * inst.quality[x] - inst.cost[i, x])
                       * inst.max_effort[i, x] ** 2 for x in range(2)]
            assert res.reports[i] == rank_by_value(margins, inst.quality)

    def test_misclassification_frequency_falls_with_sub_phase_length(self):
        # a worker whose margin estimate straddles zero misclassifies less
        # often as the assessment lengthens
        f, c, g = 2.0, 0.6, 1.0
        alpha = 1.0 / 6.0
        sigma = 1.5
        rates = []
        for length in (2, 64):
            rng = np.random.default_rng(1234)
            f_hat = f + rng.normal(0.0, sigma / math.sqrt(length), 2000) / g
            estimated = alpha * f_hat**2 * g - c > 0
            truth = alpha * f * f * g - c > 0
            rates.append(float(np.mean(estimated != truth)))
        assert rates[1] < rates[0]

    def test_report_before_assessment_raises(self):
        inst = make_homogeneous_instance([4.0, 5.0], [0.5, 0.4], [2.0, 3.0])
        s = StochasticMTBB.for_instance(inst, 0, 0.05)
        with pytest.raises(LedgerIncompleteError):
            s.report()


class TestEnumeration:
    def test_counting_two_workers_three_levels(self):
        inst = make_homogeneous_instance([2.0, 3.0], [1.0, 0.5], [1.0, 2.0],
                                         e_max=1.0, step=0.5)
        assert sum(1 for _ in enumerate_payoff_relevant_strategies(0, inst)) == 54

    def test_counting_three_workers_two_levels(self):
        inst = make_homogeneous_instance([2.0, 3.0, 4.0], [1.0, 0.8, 0.5],
                                         [1.0, 2.0, 3.0], e_max=1.0, step=1.0)
        assert sum(1 for _ in enumerate_payoff_relevant_strategies(0, inst)) == 96

    def test_counting_four_workers_five_levels(self):
        inst = make_homogeneous_instance([2.0, 3.0, 4.0, 5.0],
                                         [1.0, 0.8, 0.5, 0.3],
                                         [1.0, 2.0, 3.0, 4.0],
                                         e_max=1.0, step=0.25)
        n = sum(1 for _ in enumerate_payoff_relevant_strategies(0, inst))
        assert n == 5**4 * 24 * 5 == 75_000

    def test_cap_guard(self):
        inst = make_homogeneous_instance([2.0, 3.0, 4.0, 5.0],
                                         [1.0, 0.8, 0.5, 0.3],
                                         [1.0, 2.0, 3.0, 4.0],
                                         e_max=1.0, step=0.25)
        with pytest.raises(EnumerationCapError):
            next(enumerate_payoff_relevant_strategies(0, inst, cap=100))

    def test_yields_grid_values_only(self):
        inst = make_homogeneous_instance([2.0, 3.0], [1.0, 0.5], [1.0, 2.0],
                                         e_max=1.0, step=0.5)
        for tab in enumerate_payoff_relevant_strategies(1, inst):
            for x, e in enumerate(tab.assessment_efforts):
                assert inst.on_grid(1, x, e)
            assert inst.on_grid(1, 0, tab.operational_effort)
