"""Preference construction, worker-proposing deferred acceptance, and
assignment benchmarks.

Preferences are strict complete rankings (permutations, best first). A
matching assigns each worker exactly one task and is stored worker-indexed:
``assignment[i]`` is the task of worker ``i``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import AssumptionViolatedError, MalformedPreferencesError
from .market import MarketInstance, check_assumption

EXHAUSTIVE_LIMIT = 8  # largest N solved by permutation search


@dataclass(frozen=True)
class PreferenceList:
    """A strict ranking over the opposite side; position 0 is most preferred."""

    owner: int
    ranking: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "ranking", tuple(int(r) for r in self.ranking))
        if sorted(self.ranking) != list(range(len(self.ranking))):
            raise MalformedPreferencesError(
                f"ranking of owner {self.owner} is not a permutation: {self.ranking}")

    def rank_of(self, other: int) -> int:
        return self.ranking.index(other)


@dataclass(frozen=True)
class Matching:
    """A permutation pairing worker ``i`` with task ``assignment[i]``."""

    assignment: tuple[int, ...]

    def __post_init__(self) -> None:
        a = tuple(int(v) for v in self.assignment)
        object.__setattr__(self, "assignment", a)
        if sorted(a) != list(range(len(a))):
            raise MalformedPreferencesError(f"assignment is not a permutation: {a}")

    def __getitem__(self, worker: int) -> int:
        return self.assignment[worker]

    def __len__(self) -> int:
        return len(self.assignment)

    def worker_of(self, task: int) -> int:
        return self.assignment.index(task)


def client_preferences_from_outputs(outputs: np.ndarray) -> list[PreferenceList]:
    """Rank workers per task by output, higher first; ties favor the higher
    worker index. Accepts noisy (possibly negative) output estimates."""
    outputs = np.asarray(outputs, dtype=float)
    if not np.all(np.isfinite(outputs)):
        raise ValueError("outputs must be finite")
    n = outputs.shape[0]
    prefs = []
    for x in range(n):
        order = sorted(range(n), key=lambda i: (-outputs[i, x], -i))
        prefs.append(PreferenceList(owner=x, ranking=tuple(order)))
    return prefs


def _check_side(prefs: Sequence[PreferenceList], n: int, side: str) -> None:
    if len(prefs) != n:
        raise MalformedPreferencesError(f"expected {n} {side} lists, got {len(prefs)}")
    for p in prefs:
        if len(p.ranking) != n:
            raise MalformedPreferencesError(
                f"{side} list of owner {p.owner} has length {len(p.ranking)} != {n}")


def gale_shapley(worker_prefs: Sequence[PreferenceList],
                 client_prefs: Sequence[PreferenceList],
                 *, order: Sequence[int] | None = None,
                 return_rounds: bool = False):
    """Worker-proposing deferred acceptance.

    Round-based: every currently free worker proposes once per round, in
    ``order`` (default index order); the outcome is order-invariant. Returns
    the worker-optimal stable matching w.r.t. the submitted lists, and the
    round count when ``return_rounds`` is set.
    """
    n = len(worker_prefs)
    _check_side(worker_prefs, n, "worker")
    _check_side(client_prefs, n, "client")
    schedule = list(order) if order is not None else list(range(n))

    # rank_of_worker[x][i] = position of worker i in client x's list
    rank_of_worker = [[0] * n for _ in range(n)]
    for x in range(n):
        for pos, i in enumerate(client_prefs[x].ranking):
            rank_of_worker[x][i] = pos

    next_choice = [0] * n          # pointer into each worker's list
    held = [None] * n              # held[x] = worker on hold at task x
    task_of = [None] * n
    rounds = 0
    while any(t is None for t in task_of):
        rounds += 1
        for i in schedule:
            if task_of[i] is not None:
                continue
            x = worker_prefs[i].ranking[next_choice[i]]
            next_choice[i] += 1
            incumbent = held[x]
            if incumbent is None:
                held[x] = i
                task_of[i] = x
            elif rank_of_worker[x][i] < rank_of_worker[x][incumbent]:
                held[x] = i
                task_of[i] = x
                task_of[incumbent] = None
            # else: rejected, proposes again next round
    matching = Matching(tuple(task_of))
    if return_rounds:
        return matching, rounds
    return matching


def blocking_pairs_reported(matching: Matching,
                            worker_prefs: Sequence[PreferenceList],
                            client_prefs: Sequence[PreferenceList]) -> list[tuple[int, int]]:
    """Pairs (worker, task) where both strictly prefer each other to their
    match under the *submitted* lists."""
    n = len(matching)
    worker_rank = [{x: p.ranking.index(x) for x in range(n)} for p in worker_prefs]
    client_rank = [{i: p.ranking.index(i) for i in range(n)} for p in client_prefs]
    pairs = []
    for i in range(n):
        for x in range(n):
            if x == matching[i]:
                continue
            k = matching.worker_of(x)
            if (worker_rank[i][x] < worker_rank[i][matching[i]]
                    and client_rank[x][i] < client_rank[x][k]):
                pairs.append((i, x))
    return pairs


def assortative_matching(instance: MarketInstance) -> Matching:
    """Pair the k-th smallest maximum output with the k-th smallest quality.

    Requires task-homogeneous worker types. Output ties (impossible under the
    distinctness invariant plus opposed cost order, but constructible by hand)
    break in favor of the higher worker index, mirroring the client tie rule.
    """
    if not check_assumption(instance, 2):
        raise AssumptionViolatedError(
            "assortative matching needs task-homogeneous worker types")
    n = instance.n_workers
    outputs = instance.productivity[:, 0] * instance.max_effort[:, 0]
    workers = sorted(range(n), key=lambda i: (outputs[i], i))
    tasks = sorted(range(n), key=lambda x: instance.quality[x])
    assignment = [0] * n
    for w, x in zip(workers, tasks):
        assignment[w] = x
    return Matching(tuple(assignment))


def max_weight_assignment(weights: np.ndarray) -> tuple[Matching, float]:
    """Exact maximum-total-weight assignment.

    Exhaustive for N <= 8 with a deterministic tie rule: among maximizers the
    lexicographically largest worker-to-task vector wins. Larger problems use
    an exact rectangular-assignment solver (ties resolved arbitrarily but
    deterministically).
    """
    W = np.asarray(weights, dtype=float)
    n = W.shape[0]
    if W.shape != (n, n) or not np.all(np.isfinite(W)):
        raise ValueError("weights must be a finite square matrix")
    if n <= EXHAUSTIVE_LIMIT:
        best, best_total = None, -np.inf
        for perm in itertools.permutations(range(n)):
            total = sum(W[i, perm[i]] for i in range(n))
            if total > best_total or (total == best_total and perm > best):
                best, best_total = perm, total
        return Matching(best), float(best_total)
    rows, cols = linear_sum_assignment(W, maximize=True)
    assignment = [0] * n
    for r, c in zip(rows, cols):
        assignment[r] = int(c)
    return Matching(tuple(assignment)), float(W[rows, cols].sum())
