"""Worker strategies and the payoff-relevant deviation enumerator.

Strategies observe only what a worker can see: its own efforts, payments and
costs (plus realized revenue and task qualities in stochastic mode). They
never see productivities, costs of others, or the payment parameter, with one
exception: the stochastic bang-bang strategy takes ``alpha`` because its
utility estimator is not computable from observations alone.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import EnumerationCapError, LedgerIncompleteError
from .market import MarketInstance

ASSESSMENT = "assessment"
REPORTING = "reporting"
OPERATIONAL = "operational"


class WorkerLedger:
    """Per-task observations of one worker: payment, cost, and (stochastic
    mode) the running revenue sums behind the productivity estimate."""

    def __init__(self, n_tasks: int) -> None:
        self.n_tasks = n_tasks
        self.payment = [None] * n_tasks
        self.cost = [None] * n_tasks
        self.revenue_sum = [0.0] * n_tasks
        self.revenue_count = [0] * n_tasks

    def record_first_visit(self, task: int, payment: float, cost: float) -> None:
        if self.payment[task] is None:
            self.payment[task] = payment
            self.cost[task] = cost

    def record_revenue(self, task: int, revenue: float) -> None:
        self.revenue_sum[task] += revenue
        self.revenue_count[task] += 1

    @property
    def complete(self) -> bool:
        return all(p is not None for p in self.payment)

    def utility(self, task: int) -> float:
        """U(i, x) = observed payment minus observed cost on task x."""
        if self.payment[task] is None:
            raise LedgerIncompleteError(f"task {task} not yet observed")
        return self.payment[task] - self.cost[task]


def rank_by_value(values, quality_hint=None) -> tuple[int, ...]:
    """Rank task indices by value, descending; exact ties go to the higher
    quality first, then to the lower index."""
    n = len(values)
    hint = quality_hint if quality_hint is not None else [0.0] * n
    return tuple(sorted(range(n), key=lambda x: (-values[x], -hint[x], x)))


class MTBB:
    """Maximum effort while being assessed, truthful utility-ranked report,
    then maximum-or-zero effort depending on the observed utility sign.

    Under a mechanism with no assessment rotation, the first operational slot
    on an unvisited task probes at maximum effort so the ledger can settle the
    bang-bang decision from the next slot. ``quality_hint`` only orders exact
    report ties.
    """

    def __init__(self, worker: int, max_effort_row, effort_step: float,
                 quality_hint=None) -> None:
        self.worker = worker
        self.max_effort = [float(v) for v in max_effort_row]
        self.effort_step = effort_step
        self.quality_hint = quality_hint
        self.ledger = WorkerLedger(len(self.max_effort))

    @classmethod
    def for_instance(cls, instance: MarketInstance, worker: int) -> "MTBB":
        return cls(worker, instance.max_effort[worker], instance.effort_step,
                   quality_hint=instance.quality)

    def effort(self, t: int, phase: str, task: int) -> float:
        if phase in (ASSESSMENT, REPORTING):
            return self.max_effort[task]
        if self.ledger.payment[task] is None:
            return self.max_effort[task]  # probe an unassessed final match once
        return self.max_effort[task] if self.ledger.utility(task) > 0 else 0.0

    def report(self) -> tuple[int, ...]:
        if not self.ledger.complete:
            missing = [x for x, p in enumerate(self.ledger.payment) if p is None]
            raise LedgerIncompleteError(
                f"worker {self.worker} must observe every task before "
                f"reporting; missing {missing}")
        values = [self.ledger.utility(x) for x in range(len(self.max_effort))]
        return rank_by_value(values, self.quality_hint)

    def observe(self, t: int, phase: str, task: int, payment: float,
                cost: float, revenue: float | None = None) -> None:
        self.ledger.record_first_visit(task, payment, cost)


class StochasticMTBB:
    """Bang-bang play against noisy revenue: maximum effort through the whole
    assessment, a report ranked on the productivity estimate, and a one-shot
    operational decision on the estimated utility sign.

    The productivity estimate for task x is the sample mean of
    revenue / (g(x) * e_max(x)) over that task's assessment slots. Ranking
    values are (alpha * Fhat**2 * g - C) * e_max**2, so with zero variance the
    behavior coincides with :class:`MTBB`.
    """

    def __init__(self, worker: int, max_effort_row, effort_step: float,
                 qualities, alpha: float) -> None:
        self.worker = worker
        self.max_effort = [float(v) for v in max_effort_row]
        self.effort_step = effort_step
        self.qualities = [float(g) for g in qualities]
        self.alpha = alpha
        self.ledger = WorkerLedger(len(self.max_effort))
        self._cost_sum = [0.0] * len(self.max_effort)
        self._cost_count = [0] * len(self.max_effort)
        self._decision: dict[int, float] = {}

    @classmethod
    def for_instance(cls, instance: MarketInstance, worker: int,
                     alpha: float) -> "StochasticMTBB":
        return cls(worker, instance.max_effort[worker], instance.effort_step,
                   instance.quality, alpha)

    def productivity_estimate(self, task: int) -> float:
        if self.ledger.revenue_count[task] == 0:
            raise LedgerIncompleteError(f"task {task} not yet assessed")
        mean_revenue = self.ledger.revenue_sum[task] / self.ledger.revenue_count[task]
        return mean_revenue / (self.qualities[task] * self.max_effort[task])

    def _estimated_margin(self, task: int) -> float:
        """alpha * Fhat**2 * g - C from the worker's own observations."""
        cost_coeff = (self._cost_sum[task] / self._cost_count[task]
                      / self.max_effort[task] ** 2)
        fhat = self.productivity_estimate(task)
        return self.alpha * fhat**2 * self.qualities[task] - cost_coeff

    def effort(self, t: int, phase: str, task: int) -> float:
        if phase in (ASSESSMENT, REPORTING):
            return self.max_effort[task]
        if task not in self._decision:
            if self.ledger.revenue_count[task] == 0:
                self._decision[task] = self.max_effort[task]  # unassessed probe
            else:
                exert = self._estimated_margin(task) > 0
                self._decision[task] = self.max_effort[task] if exert else 0.0
        return self._decision[task]

    def report(self) -> tuple[int, ...]:
        n = len(self.max_effort)
        if any(c == 0 for c in self.ledger.revenue_count):
            missing = [x for x in range(n) if self.ledger.revenue_count[x] == 0]
            raise LedgerIncompleteError(
                f"worker {self.worker} reporting before assessing {missing}")
        values = [self._estimated_margin(x) * self.max_effort[x] ** 2 for x in range(n)]
        return rank_by_value(values, self.qualities)

    def observe(self, t: int, phase: str, task: int, payment: float,
                cost: float, revenue: float | None = None) -> None:
        self.ledger.record_first_visit(task, payment, cost)
        if phase == ASSESSMENT and revenue is not None:
            self.ledger.record_revenue(task, revenue)
            self._cost_sum[task] += cost
            self._cost_count[task] += 1


class ConstantEffort:
    """Exerts one grid level everywhere (clamped to each task's cap) and
    reports truthfully from whatever the ledger observed."""

    def __init__(self, worker: int, max_effort_row, effort_step: float,
                 level: float, quality_hint=None) -> None:
        self.worker = worker
        self.max_effort = [float(v) for v in max_effort_row]
        self.level = level
        self.quality_hint = quality_hint
        self.ledger = WorkerLedger(len(self.max_effort))

    @classmethod
    def for_instance(cls, instance: MarketInstance, worker: int,
                     level: float) -> "ConstantEffort":
        return cls(worker, instance.max_effort[worker], instance.effort_step,
                   level, quality_hint=instance.quality)

    def effort(self, t: int, phase: str, task: int) -> float:
        return min(self.level, self.max_effort[task])

    def report(self) -> tuple[int, ...]:
        values = [self.ledger.utility(x) if self.ledger.payment[x] is not None else 0.0
                  for x in range(len(self.max_effort))]
        return rank_by_value(values, self.quality_hint)

    def observe(self, t: int, phase: str, task: int, payment: float,
                cost: float, revenue: float | None = None) -> None:
        self.ledger.record_first_visit(task, payment, cost)


def zero_effort(instance: MarketInstance, worker: int) -> ConstantEffort:
    return ConstantEffort.for_instance(instance, worker, 0.0)


@dataclass
class Tabular:
    """A fully explicit deviation: one assessment effort per task, a fixed
    reported list, and one constant operational level (clamped to the final
    task's cap)."""

    worker: int
    assessment_efforts: tuple[float, ...]
    reported_list: tuple[int, ...]
    operational_effort: float
    max_effort: tuple[float, ...] = ()

    def bind(self, instance: MarketInstance) -> "Tabular":
        self.max_effort = tuple(float(v) for v in instance.max_effort[self.worker])
        return self

    def effort(self, t: int, phase: str, task: int) -> float:
        if phase in (ASSESSMENT, REPORTING):
            return min(self.assessment_efforts[task], self.max_effort[task])
        return min(self.operational_effort, self.max_effort[task])

    def report(self) -> tuple[int, ...]:
        return self.reported_list

    def observe(self, t: int, phase: str, task: int, payment: float,
                cost: float, revenue: float | None = None) -> None:
        pass


def mtbb_profile(instance: MarketInstance) -> list[MTBB]:
    return [MTBB.for_instance(instance, i) for i in range(instance.n_workers)]


def stochastic_mtbb_profile(instance: MarketInstance, alpha: float) -> list[StochasticMTBB]:
    return [StochasticMTBB.for_instance(instance, i, alpha)
            for i in range(instance.n_workers)]


def zero_effort_profile(instance: MarketInstance) -> list[ConstantEffort]:
    return [zero_effort(instance, i) for i in range(instance.n_workers)]


def enumerate_payoff_relevant_strategies(worker: int, instance: MarketInstance,
                                         payment=None, cap: int = 10_000_000):
    """All deviations that can matter for a worker's long-run utility under
    the one-shot-assessment rule: per-task assessment efforts on the grid,
    any reported permutation, and a constant operational level.

    ``payment`` is accepted for signature symmetry; the enumeration depends
    only on the instance. Raises :class:`EnumerationCapError` before yielding
    if the strategy count would exceed ``cap``.
    """
    n = instance.n_workers
    grids = [instance.effort_grid(worker, x) for x in range(n)]
    op_levels = sorted({float(v) for grid in grids for v in grid})
    count = math.prod(len(g) for g in grids) * math.factorial(n) * len(op_levels)
    if count > cap:
        raise EnumerationCapError(
            f"{count} strategies exceed the cap of {cap}")

    max_row = tuple(float(v) for v in instance.max_effort[worker])
    for efforts in itertools.product(*[tuple(g) for g in grids]):
        for reported in itertools.permutations(range(n)):
            for level in op_levels:
                yield Tabular(worker=worker,
                              assessment_efforts=tuple(float(e) for e in efforts),
                              reported_list=reported,
                              operational_effort=level,
                              max_effort=max_row)
