"""Assessment-matching rules: the one-shot-assessment rotation rule, its
noisy multi-slot variant, and the baseline mechanisms used for comparisons.

The rotation rule runs three phases over ``horizon`` slots: an assessment
phase (slots 0..N-1) rotating every worker over every task exactly once, a
reporting slot (t = N) where workers submit ranked task lists and the planner
ranks workers per task by assessed output, and an operational phase
(t >= N+1) fixed at the worker-proposing deferred-acceptance matching.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError, OutOfPhaseError
from .market import MarketInstance, NoiseModel, derived_constants
from .matching import (Matching, PreferenceList, client_preferences_from_outputs,
                       gale_shapley, max_weight_assignment)
from .engine import SimulationTrace, play_slot
from .payments import PaymentRule, STOCHASTIC_QUADRATIC
from .strategies import ASSESSMENT, OPERATIONAL, REPORTING

FILI = "FILI"
IILI = "IILI"
INITIAL_BELIEF = "initial-belief-assortative"
AVERAGE_OUTPUT = "average-output-assortative"
OUTPUT_ONLY = "output-only-expectation"

KINDS = (FILI, IILI, INITIAL_BELIEF, AVERAGE_OUTPUT, OUTPUT_ONLY)


@dataclass(frozen=True)
class MechanismSpec:
    """A mechanism kind with its payment rule and phase-length parameters."""

    kind: str
    payment: PaymentRule
    horizon: int
    sub_phase_length: int | None = None

    def validate(self, n_workers: int) -> None:
        if self.kind not in KINDS:
            raise InvalidConfigError(f"unknown mechanism kind {self.kind!r}")
        if self.horizon < 1:
            raise InvalidConfigError("horizon must be positive")
        if self.kind == FILI and self.horizon < n_workers + 2:
            raise InvalidConfigError(
                f"FILI needs horizon >= N+2 = {n_workers + 2}, got {self.horizon}")
        if self.kind == IILI:
            L = self.sub_phase_length
            if L is None or L < 1:
                raise InvalidConfigError("IILI needs a positive sub_phase_length")
            if self.horizon < n_workers * L + 2:
                raise InvalidConfigError(
                    f"IILI needs horizon >= N*L+2 = {n_workers * L + 2}")
            if L * L > self.horizon:
                raise InvalidConfigError(
                    f"sub_phase_length**2 = {L * L} exceeds horizon {self.horizon}")
        if self.kind in (AVERAGE_OUTPUT, OUTPUT_ONLY) and self.horizon < n_workers + 1:
            raise InvalidConfigError(f"{self.kind} needs horizon >= N+1")


@dataclass
class RunResult:
    """A finished run: the trace, the fixed matching, and the artifacts the
    matching was computed from."""

    trace: SimulationTrace
    final_matching: Matching
    assessed_outputs: np.ndarray | None = None
    reports: list[tuple[int, ...]] | None = None
    client_prefs: list[PreferenceList] | None = None


def fili_assignment(t: int, i: int, n: int) -> int:
    """Rotation task of worker ``i`` in slot ``t``: (t + i) mod n. Only valid
    before the operational phase (t <= n)."""
    if t > n:
        raise OutOfPhaseError(f"slot {t} is operational for n={n}")
    return (t + i) % n


def _check_alpha_cap(instance: MarketInstance, payment: PaymentRule) -> None:
    if payment.alpha is not None:
        cap = derived_constants(instance).alpha_star
        if payment.alpha > cap * (1 + 1e-12):
            raise InvalidConfigError(
                f"alpha={payment.alpha:g} violates the participation "
                f"cap 1/(2*W_max)={cap:g}")


def _observe(strategy, record) -> None:
    cost = record.payment - record.worker_utility
    strategy.observe(record.t, record.phase, record.task, record.payment,
                     cost, revenue=record.revenue)


def run_fili(instance: MarketInstance, payment: PaymentRule, strategies,
             horizon: int) -> RunResult:
    """Deterministic one-shot-assessment run."""
    n = instance.n_workers
    MechanismSpec(FILI, payment, horizon).validate(n)
    _check_alpha_cap(instance, payment)
    if payment.stochastic:
        raise InvalidConfigError("deterministic rule cannot settle a stochastic payment")

    records = []
    w_e = np.zeros((n, n))
    for t in range(n):
        for i in range(n):
            task = fili_assignment(t, i, n)
            e = strategies[i].effort(t, ASSESSMENT, task)
            rec = play_slot(instance, payment, i, task, e, t=t, phase=ASSESSMENT)
            w_e[i, task] = rec.output
            records.append(rec)
            _observe(strategies[i], rec)

    reports = [tuple(strategies[i].report()) for i in range(n)]
    worker_prefs = [PreferenceList(owner=i, ranking=reports[i]) for i in range(n)]
    client_prefs = client_preferences_from_outputs(w_e)
    for i in range(n):
        task = fili_assignment(n, i, n)
        e = strategies[i].effort(n, REPORTING, task)
        rec = play_slot(instance, payment, i, task, e, t=n, phase=REPORTING)
        records.append(rec)
        _observe(strategies[i], rec)

    matching = gale_shapley(worker_prefs, client_prefs)
    for t in range(n + 1, horizon):
        for i in range(n):
            task = matching[i]
            e = strategies[i].effort(t, OPERATIONAL, task)
            rec = play_slot(instance, payment, i, task, e, t=t, phase=OPERATIONAL)
            records.append(rec)
            _observe(strategies[i], rec)

    trace = SimulationTrace(records, instance, payment,
                            final_matching=matching, operational_start=n + 1)
    return RunResult(trace, matching, assessed_outputs=w_e, reports=reports,
                     client_prefs=client_prefs)


def run_iili(instance: MarketInstance, noise: NoiseModel, payment: PaymentRule,
             strategies, horizon: int, sub_phase_length: int) -> RunResult:
    """Noisy-revenue variant: each worker spends ``sub_phase_length`` slots
    per task; the planner ranks on sample-mean output estimates."""
    n = instance.n_workers
    L = sub_phase_length
    MechanismSpec(IILI, payment, horizon, sub_phase_length=L).validate(n)
    _check_alpha_cap(instance, payment)
    if payment.family != STOCHASTIC_QUADRATIC:
        raise InvalidConfigError("the noisy rule settles with the stochastic payment")

    records = []
    estimate_sum = np.zeros((n, n))
    for t in range(n * L):
        k = t // L
        for i in range(n):
            task = (k + i) % n
            e = strategies[i].effort(t, ASSESSMENT, task)
            z = noise.draw(i, task, t)
            rec = play_slot(instance, payment, i, task, e, t=t, phase=ASSESSMENT,
                            noise=z, variance=float(noise.variances[i, task]))
            estimate_sum[i, task] += rec.output
            records.append(rec)
            _observe(strategies[i], rec)

    w_hat = estimate_sum / L
    reports = [tuple(strategies[i].report()) for i in range(n)]
    worker_prefs = [PreferenceList(owner=i, ranking=reports[i]) for i in range(n)]
    client_prefs = client_preferences_from_outputs(w_hat)

    t_report = n * L
    for i in range(n):
        task = (t_report + i) % n
        e = strategies[i].effort(t_report, REPORTING, task)
        z = noise.draw(i, task, t_report)
        rec = play_slot(instance, payment, i, task, e, t=t_report, phase=REPORTING,
                        noise=z, variance=float(noise.variances[i, task]))
        records.append(rec)
        _observe(strategies[i], rec)

    matching = gale_shapley(worker_prefs, client_prefs)
    for t in range(t_report + 1, horizon):
        for i in range(n):
            task = matching[i]
            e = strategies[i].effort(t, OPERATIONAL, task)
            z = noise.draw(i, task, t)
            rec = play_slot(instance, payment, i, task, e, t=t, phase=OPERATIONAL,
                            noise=z, variance=float(noise.variances[i, task]))
            records.append(rec)
            _observe(strategies[i], rec)

    trace = SimulationTrace(records, instance, payment, final_matching=matching,
                            operational_start=t_report + 1, stochastic=True)
    return RunResult(trace, matching, assessed_outputs=w_hat, reports=reports,
                     client_prefs=client_prefs)


def _fixed_matching_run(instance, payment, strategies, horizon, matching,
                        start_t: int, records) -> RunResult:
    for t in range(start_t, horizon):
        for i in range(instance.n_workers):
            task = matching[i]
            e = strategies[i].effort(t, OPERATIONAL, task)
            rec = play_slot(instance, payment, i, task, e, t=t, phase=OPERATIONAL)
            records.append(rec)
            _observe(strategies[i], rec)
    trace = SimulationTrace(records, instance, payment, final_matching=matching,
                            operational_start=start_t)
    return RunResult(trace, matching)


def run_baseline_initial_belief(instance: MarketInstance, beliefs, payment: PaymentRule,
                                strategies, horizon: int, *, seed: int = 0) -> RunResult:
    """Match on prior beliefs at slot 0: workers ranked by mean belief and
    paired assortatively with qualities; belief ties are randomized."""
    n = instance.n_workers
    _check_alpha_cap(instance, payment)
    beliefs = np.asarray(beliefs, dtype=float)
    if beliefs.shape != (n,) or not np.all(np.isfinite(beliefs)):
        raise InvalidConfigError("beliefs must be a finite length-N vector")
    rng = np.random.default_rng(seed)
    tiebreak = rng.permutation(n)
    workers = sorted(range(n), key=lambda i: (beliefs[i], tiebreak[i]))
    tasks = sorted(range(n), key=lambda x: instance.quality[x])
    assignment = [0] * n
    for w, x in zip(workers, tasks):
        assignment[w] = x
    return _fixed_matching_run(instance, payment, strategies, horizon,
                               Matching(tuple(assignment)), 0, [])


def _assessment_rotation(instance, payment, strategies, records):
    n = instance.n_workers
    w_e = np.zeros((n, n))
    for t in range(n):
        for i in range(n):
            task = fili_assignment(t, i, n)
            e = strategies[i].effort(t, ASSESSMENT, task)
            rec = play_slot(instance, payment, i, task, e, t=t, phase=ASSESSMENT)
            w_e[i, task] = rec.output
            records.append(rec)
            _observe(strategies[i], rec)
    return w_e


def run_baseline_average_output(instance: MarketInstance, payment: PaymentRule,
                                strategies, horizon: int) -> RunResult:
    """Assess for N slots, rank workers by their row-average output, and fix
    the assortative matching; no reporting phase. Average ties favor the
    higher worker index."""
    n = instance.n_workers
    MechanismSpec(AVERAGE_OUTPUT, payment, horizon).validate(n)
    _check_alpha_cap(instance, payment)
    records = []
    w_e = _assessment_rotation(instance, payment, strategies, records)
    averages = w_e.mean(axis=1)
    workers = sorted(range(n), key=lambda i: (averages[i], i))
    tasks = sorted(range(n), key=lambda x: instance.quality[x])
    assignment = [0] * n
    for w, x in zip(workers, tasks):
        assignment[w] = x
    result = _fixed_matching_run(instance, payment, strategies, horizon,
                                 Matching(tuple(assignment)), n, records)
    result.assessed_outputs = w_e
    return result


def run_baseline_output_only(instance: MarketInstance, payment: PaymentRule,
                             strategies, horizon: int) -> RunResult:
    """Assess for N slots, then fix the matching maximizing the planner's
    projected revenue sum(W_e[k, m[k]] * g(m[k])) over all assignments."""
    n = instance.n_workers
    MechanismSpec(OUTPUT_ONLY, payment, horizon).validate(n)
    _check_alpha_cap(instance, payment)
    records = []
    w_e = _assessment_rotation(instance, payment, strategies, records)
    weights = w_e * instance.quality[None, :]
    matching, _ = max_weight_assignment(weights)
    result = _fixed_matching_run(instance, payment, strategies, horizon,
                                 matching, n, records)
    result.assessed_outputs = w_e
    return result
