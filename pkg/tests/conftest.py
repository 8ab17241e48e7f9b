import numpy as np
import pytest

from matchsim import (GenerationConfig, MarketInstance, PaymentRule,
                      counterexample_instance, generate_instance)


@pytest.fixture
def counterexample():
    return counterexample_instance()


@pytest.fixture
def counterexample_payment():
    return PaymentRule.quadratic(1.0 / 12.0)


@pytest.fixture
def paper_generation_config():
    return GenerationConfig(
        n_workers=10, productivity_upper_1=20.0, productivity_upper_2=14.0,
        cost_intercept=2.0, cost_slope=0.05, quality_offset=2.0,
        quality_scale=10.0, shared_max_effort=1.0, effort_step=1.0, seed=0)


def make_homogeneous_instance(f, c, g, e_max=1.0, step=None, **bounds):
    """Task-homogeneous instance from per-worker vectors."""
    f = np.asarray(f, dtype=float)
    c = np.asarray(c, dtype=float)
    n = len(f)
    return MarketInstance(
        productivity=np.tile(f[:, None], (1, n)),
        cost=np.tile(c[:, None], (1, n)),
        quality=np.asarray(g, dtype=float),
        max_effort=np.full((n, n), e_max),
        effort_step=step if step is not None else e_max,
        **bounds)
