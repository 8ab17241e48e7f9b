"""Stage-game execution, utility accounting, long-run values, and Monte
Carlo replication.

Per slot, a matched worker-client pair settles: the worker produces
``F(i, x) * e`` units, the client books revenue ``output * g(x)`` (plus noise
in stochastic mode), pays per the payment rule, and each side's stage utility
is payment minus effort cost, respectively revenue minus payment.
"""

from __future__ import annotations

import csv
import json
import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import NonConstantTailError, OffGridEffortError
from .market import MarketInstance, NoiseModel
from .matching import Matching
from .payments import PaymentRule

FINITE_AVERAGE = "finite-average"
LIMIT = "limit"

TRACE_COLUMNS = ("t", "phase", "worker", "task", "effort", "output",
                 "revenue", "payment", "worker_utility", "client_utility",
                 "noise_draw")


@dataclass(frozen=True)
class SlotRecord:
    t: int
    phase: str
    worker: int
    task: int
    effort: float
    output: float
    revenue: float
    payment: float
    worker_utility: float
    client_utility: float
    noise_draw: float = 0.0


@dataclass
class SimulationTrace:
    """Every slot record of one run plus the context needed to re-derive
    long-run values."""

    records: list[SlotRecord]
    instance: MarketInstance
    payment: PaymentRule
    final_matching: Matching | None = None
    operational_start: int | None = None
    stochastic: bool = False

    @property
    def n_slots(self) -> int:
        return 1 + max(r.t for r in self.records) if self.records else 0

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRACE_COLUMNS)
            for r in self.records:
                writer.writerow([getattr(r, c) for c in TRACE_COLUMNS])

    def to_jsonl(self, path) -> None:
        with open(path, "w") as fh:
            for r in self.records:
                fh.write(json.dumps({c: getattr(r, c) for c in TRACE_COLUMNS}) + "\n")


@dataclass(frozen=True)
class OutcomeReport:
    """Long-run utilities, revenue and profit of one run."""

    worker_utilities: tuple[float, ...]
    client_utilities: tuple[float, ...]
    total_revenue: float
    total_profit: float
    final_matching: Matching | None
    mode: str

    def to_dict(self) -> dict:
        return {
            "worker_utilities": list(self.worker_utilities),
            "client_utilities": list(self.client_utilities),
            "total_revenue": self.total_revenue,
            "total_profit": self.total_profit,
            "final_matching": list(self.final_matching.assignment)
            if self.final_matching else None,
            "mode": self.mode,
        }


def play_slot(instance: MarketInstance, payment: PaymentRule, worker: int,
              task: int, effort: float, *, t: int = 0, phase: str = "operational",
              noise: float | None = None, variance: float = 0.0) -> SlotRecord:
    """Settle one stage game. ``noise`` switches to the stochastic model:
    revenue picks up the draw and the planner observes output as revenue/g."""
    if not instance.on_grid(worker, task, effort):
        raise OffGridEffortError(
            f"effort {effort!r} of worker {worker} is off the grid for task {task}")
    F = instance.productivity[worker, task]
    g = instance.quality[task]
    C = instance.cost[worker, task]
    produced = F * effort
    if noise is None:
        output = produced
        revenue = produced * g
        pay = payment.settle(output, g)
    else:
        revenue = produced * g + noise
        output = revenue / g
        pay = payment.settle_noisy(revenue, g, variance)
    cost = C * effort * effort
    return SlotRecord(t=t, phase=phase, worker=worker, task=task,
                      effort=effort, output=output, revenue=revenue,
                      payment=pay, worker_utility=pay - cost,
                      client_utility=revenue - pay,
                      noise_draw=0.0 if noise is None else noise)


def _limit_stage_values(instance, payment, worker, task, effort):
    """Expected per-slot (u, v, r) at a stationary effort; exact in the
    deterministic families and the noise-expectation in the stochastic one."""
    F = instance.productivity[worker, task]
    g = instance.quality[task]
    C = instance.cost[worker, task]
    pay = payment.expected_payment(F * effort, g)
    revenue = F * effort * g
    return pay - C * effort * effort, revenue - pay, revenue


def long_run_values(trace: SimulationTrace, mode: str = LIMIT) -> OutcomeReport:
    """Long-run utilities: arithmetic slot means, or the stationary
    operational per-slot values (finite phases discarded)."""
    n = trace.instance.n_workers
    if mode == FINITE_AVERAGE:
        n_slots = trace.n_slots
        u = [0.0] * n
        v = [0.0] * n
        revenue = 0.0
        for r in trace.records:
            u[r.worker] += r.worker_utility
            v[r.task] += r.client_utility
            revenue += r.revenue
        u = [float(x / n_slots) for x in u]
        v = [float(x / n_slots) for x in v]
        return OutcomeReport(tuple(u), tuple(v), float(revenue / n_slots),
                             float(sum(v)), trace.final_matching, FINITE_AVERAGE)
    if mode != LIMIT:
        raise ValueError(f"unknown mode {mode!r}")
    if trace.final_matching is None:
        raise NonConstantTailError("limit mode requires an eventually-constant matching")
    last_t = max(r.t for r in trace.records)
    tail = {r.worker: r for r in trace.records if r.t == last_t}
    if any(r.phase != "operational" for r in tail.values()):
        raise NonConstantTailError("trace ends before the operational phase")
    u = [0.0] * n
    v = [0.0] * n
    revenue = 0.0
    for i in range(n):
        rec = tail[i]
        if rec.task != trace.final_matching[i]:
            raise NonConstantTailError("matching still changing at the trace tail")
        ui, vx, ri = _limit_stage_values(trace.instance, trace.payment, i,
                                         rec.task, rec.effort)
        u[i] = float(ui)
        v[rec.task] = float(vx)
        revenue += ri
    return OutcomeReport(tuple(u), tuple(v), float(revenue), float(sum(v)),
                         trace.final_matching, LIMIT)


@dataclass(frozen=True)
class ReplicationSummary:
    metrics: dict

    def to_csv(self, path, header: str | None = None) -> None:
        with open(path, "w", newline="") as fh:
            if header:
                fh.write(header.rstrip("\n") + "\n")
            writer = csv.writer(fh)
            writer.writerow(["metric", "mean", "stderr", "n"])
            for name, (mean, stderr, count) in self.metrics.items():
                writer.writerow([name, repr(mean), repr(stderr), count])


def _mean_stderr(xs: list[float]) -> tuple[float, float, int]:
    n = len(xs)
    mean = sum(xs) / n
    stderr = statistics.stdev(xs) / math.sqrt(n) if n > 1 else 0.0
    return mean, stderr, n


def replicate(run_fn, n_runs: int, seed: int, jobs: int = 1
              ) -> tuple[list[OutcomeReport], ReplicationSummary]:
    """Run ``run_fn(seed_k)`` once per derived child seed and aggregate.

    Child seeds come from spawning the master seed sequence, so runs are
    mutually independent and the whole batch is reproducible. Reports merge
    in run order regardless of ``jobs``.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    children = np.random.SeedSequence(seed).spawn(n_runs)
    seeds = [int(c.generate_state(1, np.uint64)[0]) for c in children]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(run_fn, seeds))
    else:
        reports = [run_fn(s) for s in seeds]
    metrics = {
        "total_revenue": _mean_stderr([r.total_revenue for r in reports]),
        "total_profit": _mean_stderr([r.total_profit for r in reports]),
        "worker_utility_mean": _mean_stderr(
            [sum(r.worker_utilities) / len(r.worker_utilities) for r in reports]),
        "client_utility_mean": _mean_stderr(
            [sum(r.client_utilities) / len(r.client_utilities) for r in reports]),
    }
    return reports, ReplicationSummary(metrics)
