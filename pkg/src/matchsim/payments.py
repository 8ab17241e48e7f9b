"""Payment-rule families and per-slot settlement.

Three families: ``quadratic`` pays alpha * w**2 * g for output w on a task of
quality g; ``linear`` pays a fraction beta of the revenue w * g; and
``stochastic-quadratic`` settles on realized revenue R as
alpha * R**2 / g - alpha * sigma2 / g, whose expectation at effort e equals
the noise-free quadratic payment alpha * (F*e)**2 * g. Stochastic payments
may be negative; no flooring, since the unbiasedness is load-bearing.
"""

from __future__ import annotations

from dataclasses import dataclass

QUADRATIC = "quadratic"
LINEAR = "linear"
STOCHASTIC_QUADRATIC = "stochastic-quadratic"


def settle_quadratic(output: float, quality: float, alpha: float) -> float:
    """alpha * w**2 * g."""
    return alpha * output * output * quality


def settle_linear(output: float, quality: float, beta: float) -> float:
    """beta * w * g: the worker keeps a fixed revenue share."""
    return beta * output * quality


def settle_stochastic_quadratic(realized_revenue: float, quality: float,
                                variance: float, alpha: float) -> float:
    """alpha * R**2 / g - alpha * sigma2 / g; unbiased for the quadratic rule."""
    return alpha * (realized_revenue * realized_revenue - variance) / quality


@dataclass(frozen=True)
class PaymentRule:
    """A tagged payment family with its parameter.

    ``alpha`` must respect the participation cap alpha <= 1/(2*W_max); the cap
    depends on the instance, so it is enforced where instance and rule meet
    (mechanism entry points and scenario validation), not at construction.
    """

    family: str
    alpha: float | None = None
    beta: float | None = None

    def __post_init__(self) -> None:
        if self.family in (QUADRATIC, STOCHASTIC_QUADRATIC):
            if self.alpha is None or self.alpha <= 0:
                raise ValueError(f"{self.family} payment requires alpha > 0")
        elif self.family == LINEAR:
            if self.beta is None or not 0.0 <= self.beta <= 1.0:
                raise ValueError("linear payment requires beta in [0, 1]")
        else:
            raise ValueError(f"unknown payment family {self.family!r}")

    @classmethod
    def quadratic(cls, alpha: float) -> "PaymentRule":
        return cls(QUADRATIC, alpha=alpha)

    @classmethod
    def linear(cls, beta: float) -> "PaymentRule":
        return cls(LINEAR, beta=beta)

    @classmethod
    def stochastic_quadratic(cls, alpha: float) -> "PaymentRule":
        return cls(STOCHASTIC_QUADRATIC, alpha=alpha)

    @property
    def stochastic(self) -> bool:
        return self.family == STOCHASTIC_QUADRATIC

    def settle(self, output: float, quality: float) -> float:
        """Deterministic settlement on observed output."""
        if self.family == QUADRATIC:
            return settle_quadratic(output, quality, self.alpha)
        if self.family == LINEAR:
            return settle_linear(output, quality, self.beta)
        raise ValueError("stochastic settlement needs realized revenue; use settle_noisy")

    def settle_noisy(self, realized_revenue: float, quality: float,
                     variance: float) -> float:
        if self.family != STOCHASTIC_QUADRATIC:
            raise ValueError(f"settle_noisy undefined for family {self.family!r}")
        return settle_stochastic_quadratic(realized_revenue, quality, variance, self.alpha)

    def expected_payment(self, mean_output: float, quality: float) -> float:
        """Expected settlement at a deterministic mean output level."""
        if self.family == LINEAR:
            return settle_linear(mean_output, quality, self.beta)
        return settle_quadratic(mean_output, quality, self.alpha)

    def to_dict(self) -> dict:
        d: dict = {"family": self.family}
        if self.alpha is not None:
            d["alpha"] = self.alpha
        if self.beta is not None:
            d["beta"] = self.beta
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PaymentRule":
        return cls(d["family"], alpha=d.get("alpha"), beta=d.get("beta"))
