"""Small fixed instances used by the canned reproductions and tests."""

from __future__ import annotations

import numpy as np

from .market import MarketInstance


def counterexample_instance() -> MarketInstance:
    """Two workers, two tasks; the average-output rule mismatches them while
    the rotation-assessment rule pairs worker 0 with the high-quality task."""
    return MarketInstance(
        productivity=np.array([[6.0, 2.0], [5.0, 4.0]]),
        cost=np.array([[1.0, 2.0], [1.0, 2.0]]),
        quality=np.array([2.0, 1.0]),
        max_effort=np.ones((2, 2)),
        effort_step=1.0,
    )


def manipulation_instance() -> MarketInstance:
    """Two workers with one row of equal productivities: under an output-only
    matcher, worker 0 gains by sandbagging task 1."""
    return MarketInstance(
        productivity=np.array([[6.0, 6.0], [5.0, 4.0]]),
        cost=np.array([[1.0, 2.0], [1.0, 2.0]]),
        quality=np.array([2.0, 1.0]),
        max_effort=np.ones((2, 2)),
        effort_step=1.0,
    )


def rate_experiment_instance() -> MarketInstance:
    """Two task-homogeneous workers whose participation margin is positive at
    every task, so steady-state revenue hits the obedient bound and the only
    losses left are assessment-phase and misranking ones."""
    return MarketInstance(
        productivity=np.array([[4.0, 4.0], [5.0, 5.0]]),
        cost=np.array([[0.5, 0.5], [0.4, 0.4]]),
        quality=np.array([2.0, 3.0]),
        max_effort=np.ones((2, 2)),
        effort_step=1.0,
    )
