"""Market instances: domain types, assumption predicates, derived constants,
randomized generation, and instance serialization.

A market has N workers and N tasks (one client per task). Worker ``i`` on task
``x`` has productivity ``F(i, x)``, quadratic effort cost ``C(i, x) * e**2``,
and a private effort grid ``{0, step, 2*step, ..., max_effort(i, x)}``. Task
``x`` yields revenue ``g(x)`` per unit of output.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidConfigError

_GRID_TOL = 1e-9


@lru_cache(maxsize=65536)
def _stream_key(seed: int, i: int, x: int) -> tuple[int, int]:
    state = np.random.SeedSequence(entropy=seed, spawn_key=(i, x)).generate_state(2, np.uint64)
    return int(state[0]), int(state[1])


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MarketInstance:
    """An immutable market: productivities, costs, qualities, effort grids.

    The declared parameter ranges (``f_min`` ... ``e_u_max``) bound every
    matrix entry; they default to the realized extrema. Quality entries must
    be positive; instances produced by :func:`generate_instance` additionally
    have strictly increasing qualities, but hand-built instances may order
    them freely (ordering-sensitive logic sorts by value).
    """

    productivity: np.ndarray
    cost: np.ndarray
    quality: np.ndarray
    max_effort: np.ndarray
    effort_step: float
    f_min: float = None  # type: ignore[assignment]
    f_max: float = None  # type: ignore[assignment]
    c_min: float = None  # type: ignore[assignment]
    c_max: float = None  # type: ignore[assignment]
    g_min: float = None  # type: ignore[assignment]
    g_max: float = None  # type: ignore[assignment]
    e_l_max: float = None  # type: ignore[assignment]
    e_u_max: float = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        F = _frozen(self.productivity)
        C = _frozen(self.cost)
        g = _frozen(self.quality)
        e = _frozen(self.max_effort)
        object.__setattr__(self, "productivity", F)
        object.__setattr__(self, "cost", C)
        object.__setattr__(self, "quality", g)
        object.__setattr__(self, "max_effort", e)

        n = F.shape[0]
        if F.shape != (n, n) or C.shape != (n, n) or e.shape != (n, n):
            raise ValueError("productivity, cost and max_effort must be square N x N")
        if g.shape != (n,):
            raise ValueError("quality must be a length-N vector")
        if n < 1:
            raise ValueError("need at least one worker")
        if not np.all(np.isfinite(F)) or not np.all(np.isfinite(C)):
            raise ValueError("non-finite matrix entries")
        if np.any(g <= 0):
            raise ValueError("task qualities must be positive")
        if np.any(C < 0):
            raise ValueError("costs must be non-negative")
        if np.any(e <= 0):
            raise ValueError("max efforts must be positive")
        if not self.effort_step > 0:
            raise ValueError("effort_step must be positive")

        # no two workers share a productivity on the same task
        for x in range(n):
            col = F[:, x]
            if len(set(col.tolist())) != n:
                raise ValueError(f"duplicate productivity in task column {x}")

        # every max effort is an exact grid multiple
        k = np.rint(e / self.effort_step)
        if np.any(np.abs(e - k * self.effort_step) > _GRID_TOL * np.maximum(1.0, e)):
            raise ValueError("max_effort entries must be integer multiples of effort_step")

        defaults = {
            "f_min": float(F.min()),
            "f_max": float(F.max()),
            "c_min": float(C.min()),
            "c_max": float(C.max()),
            "g_min": float(g.min()),
            "g_max": float(g.max()),
            "e_l_max": float(e.min()),
            "e_u_max": float(e.max()),
        }
        for name, value in defaults.items():
            if getattr(self, name) is None:
                object.__setattr__(self, name, value)
        if not (self.f_min <= F.min() and F.max() <= self.f_max):
            raise ValueError("productivity outside declared [f_min, f_max]")
        if not (self.c_min <= C.min() and C.max() <= self.c_max):
            raise ValueError("cost outside declared [c_min, c_max]")
        if not (self.g_min <= g.min() and g.max() <= self.g_max):
            raise ValueError("quality outside declared [g_min, g_max]")
        if not (self.e_l_max <= e.min() and e.max() <= self.e_u_max):
            raise ValueError("max_effort outside declared [e_l_max, e_u_max]")

    @property
    def n_workers(self) -> int:
        return self.productivity.shape[0]

    def effort_grid(self, worker: int, task: int) -> np.ndarray:
        """The feasible effort levels of ``worker`` on ``task``."""
        cap = self.max_effort[worker, task]
        k = int(round(cap / self.effort_step))
        return np.arange(k + 1) * self.effort_step

    def on_grid(self, worker: int, task: int, effort: float) -> bool:
        cap = self.max_effort[worker, task]
        if effort < -_GRID_TOL or effort > cap + _GRID_TOL:
            return False
        k = round(effort / self.effort_step)
        return abs(effort - k * self.effort_step) <= _GRID_TOL * max(1.0, cap)

    def quality_ascending(self) -> bool:
        g = self.quality
        return bool(np.all(g[:-1] < g[1:]))

    # --- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "n_workers": self.n_workers,
            "productivity": self.productivity.tolist(),
            "cost": self.cost.tolist(),
            "quality": self.quality.tolist(),
            "max_effort": self.max_effort.tolist(),
            "effort_step": self.effort_step,
            "bounds": {
                "f_min": self.f_min,
                "f_max": self.f_max,
                "c_min": self.c_min,
                "c_max": self.c_max,
                "g_min": self.g_min,
                "g_max": self.g_max,
                "e_l_max": self.e_l_max,
                "e_u_max": self.e_u_max,
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MarketInstance":
        bounds = d.get("bounds", {})
        return cls(
            productivity=np.array(d["productivity"], dtype=float),
            cost=np.array(d["cost"], dtype=float),
            quality=np.array(d["quality"], dtype=float),
            max_effort=np.array(d["max_effort"], dtype=float),
            effort_step=float(d["effort_step"]),
            **{k: bounds.get(k) for k in (
                "f_min", "f_max", "c_min", "c_max",
                "g_min", "g_max", "e_l_max", "e_u_max")},
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "MarketInstance":
        return cls.from_dict(json.loads(text))

    def to_text(self) -> str:
        """Flat key-value document with matrix blocks; round-trips exactly."""
        out = io.StringIO()
        out.write("format matchsim-instance-v1\n")
        out.write(f"n_workers {self.n_workers}\n")
        out.write(f"effort_step {self.effort_step!r}\n")
        for name in ("f_min", "f_max", "c_min", "c_max",
                     "g_min", "g_max", "e_l_max", "e_u_max"):
            out.write(f"{name} {getattr(self, name)!r}\n")
        for name in ("productivity", "cost", "max_effort"):
            out.write(f"{name}\n")
            for row in getattr(self, name):
                out.write(" ".join(repr(float(v)) for v in row) + "\n")
        out.write("quality\n")
        out.write(" ".join(repr(float(v)) for v in self.quality) + "\n")
        return out.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "MarketInstance":
        lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        if not lines or lines[0].split() != ["format", "matchsim-instance-v1"]:
            raise ValueError("not a matchsim instance document")
        scalars: dict[str, float] = {}
        matrices: dict[str, list[list[float]]] = {}
        i = 1
        n = None
        while i < len(lines):
            parts = lines[i].split()
            key = parts[0]
            if key == "n_workers":
                n = int(parts[1])
                i += 1
            elif len(parts) == 2:
                scalars[key] = float(parts[1])
                i += 1
            else:
                if n is None:
                    raise ValueError("n_workers must precede matrix blocks")
                rows = 1 if key == "quality" else n
                block = [[float(v) for v in lines[i + 1 + r].split()] for r in range(rows)]
                matrices[key] = block
                i += 1 + rows
        return cls(
            productivity=np.array(matrices["productivity"]),
            cost=np.array(matrices["cost"]),
            quality=np.array(matrices["quality"][0]),
            max_effort=np.array(matrices["max_effort"]),
            effort_step=scalars["effort_step"],
            **{k: scalars.get(k) for k in (
                "f_min", "f_max", "c_min", "c_max",
                "g_min", "g_max", "e_l_max", "e_u_max")},
        )


@dataclass(frozen=True)
class DerivedConstants:
    """Planner-side constants implied by an instance's declared bounds."""

    w_max: float
    alpha_star: float
    g_l: float
    g_u: float


def derived_constants(instance: MarketInstance) -> DerivedConstants:
    """Maximum output, the participation payment cap, and the two quality
    thresholds separating always-worked from never-worked tasks. A zero
    declared f_min pushes g_u to infinity (no task is high-quality enough to
    guarantee effort from an arbitrarily unproductive worker)."""
    w_max = instance.f_max * float(instance.max_effort.max())
    return DerivedConstants(
        w_max=w_max,
        alpha_star=1.0 / (2.0 * w_max),
        g_l=2.0 * instance.c_min * w_max / instance.f_max**2,
        g_u=(math.inf if instance.f_min == 0
             else 2.0 * instance.c_max * w_max / instance.f_min**2),
    )


@dataclass(frozen=True)
class NoiseModel:
    """Zero-mean revenue noise, one independent stream per (worker, task, slot).

    ``draw(i, x, t)`` is a pure function of the seed and the triple, so a
    strategy change never perturbs another agent's draws (common random
    numbers). ``family`` is ``gaussian``, ``uniform-symmetric`` or ``none``.
    """

    variances: np.ndarray
    family: str = "gaussian"
    seed: int = 0

    def __post_init__(self) -> None:
        v = _frozen(self.variances)
        object.__setattr__(self, "variances", v)
        if np.any(v < 0):
            raise ValueError("variances must be non-negative")
        if self.family not in ("gaussian", "uniform-symmetric", "none"):
            raise ValueError(f"unknown noise family {self.family!r}")

    @classmethod
    def constant(cls, n: int, variance: float, family: str = "gaussian",
                 seed: int = 0) -> "NoiseModel":
        return cls(np.full((n, n), float(variance)), family=family, seed=seed)

    def _generator(self, i: int, x: int, t: int) -> np.random.Generator:
        bitgen = np.random.Philox(key=_stream_key(self.seed, i, x))
        bitgen.advance(int(t) * 4)  # disjoint counter range per slot
        return np.random.Generator(bitgen)

    def draw(self, i: int, x: int, t: int) -> float:
        return float(self.draw_block(i, x, t, 1)[0])

    def draw_block(self, i: int, x: int, t0: int, count: int) -> np.ndarray:
        """Draws for slots ``t0 .. t0+count-1`` of the (i, x) stream."""
        sigma2 = float(self.variances[i, x])
        if self.family == "none" or sigma2 == 0.0:
            return np.zeros(count)
        # one draw consumes at most 4 Philox outputs, so slot k is generated
        # from counter offset 4k and streams never overlap
        out = np.empty(count)
        for k in range(count):
            gen = self._generator(i, x, t0 + k)
            if self.family == "gaussian":
                out[k] = gen.standard_normal() * math.sqrt(sigma2)
            else:
                half_width = math.sqrt(3.0 * sigma2)
                out[k] = gen.uniform(-half_width, half_width)
        return out


@dataclass(frozen=True)
class GenerationConfig:
    """Parameters of the randomized instance family used in comparisons.

    Half of the workers draw productivity from U[0, w1], half from U[0, w2];
    cost is the decreasing affine map C(i) = C1 - C2 * F(i); qualities draw
    from t1 + t2 * U[0, 1] and are sorted ascending; one shared max effort.
    """

    n_workers: int
    productivity_upper_1: float
    productivity_upper_2: float
    cost_intercept: float
    cost_slope: float
    quality_offset: float
    quality_scale: float
    shared_max_effort: float = 1.0
    effort_step: float = 1.0
    seed: int = 0


def generate_instance(cfg: GenerationConfig) -> MarketInstance:
    """Draw a per-worker-constant instance from the two-pool uniform family."""
    w1, w2 = cfg.productivity_upper_1, cfg.productivity_upper_2
    c1, c2 = cfg.cost_intercept, cfg.cost_slope
    if cfg.n_workers < 1:
        raise InvalidConfigError("n_workers must be positive")
    if min(w1, w2, c1, cfg.quality_offset, cfg.quality_scale,
           cfg.shared_max_effort, cfg.effort_step) <= 0 or c2 < 0:
        raise InvalidConfigError("generation parameters must be positive")
    f_upper = max(w1, w2)
    if c1 - c2 * f_upper <= 0:
        raise InvalidConfigError(
            f"cost C1 - C2*F can reach {c1 - c2 * f_upper:g} <= 0 at F={f_upper:g}")

    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_workers
    n_pool1 = n // 2 + n % 2

    f = np.empty(n)
    while True:
        f[:n_pool1] = rng.uniform(0.0, w1, size=n_pool1)
        f[n_pool1:] = rng.uniform(0.0, w2, size=n - n_pool1)
        if len(set(f.tolist())) == n and np.all(f > 0):
            break  # re-draw on (measure-zero) collision

    g = cfg.quality_offset + cfg.quality_scale * rng.uniform(0.0, 1.0, size=n)
    while len(set(g.tolist())) != n:
        g = cfg.quality_offset + cfg.quality_scale * rng.uniform(0.0, 1.0, size=n)
    g.sort()

    cost = c1 - c2 * f
    return MarketInstance(
        productivity=np.tile(f[:, None], (1, n)),
        cost=np.tile(cost[:, None], (1, n)),
        quality=g,
        max_effort=np.full((n, n), cfg.shared_max_effort),
        effort_step=cfg.effort_step,
        f_min=0.0,
        f_max=f_upper,
        c_min=c1 - c2 * f_upper,
        c_max=c1,
        g_min=cfg.quality_offset,
        g_max=cfg.quality_offset + cfg.quality_scale,
        e_l_max=cfg.shared_max_effort,
        e_u_max=cfg.shared_max_effort,
    )


@dataclass(frozen=True)
class AssumptionCheck:
    """Outcome of an assumption predicate with the first violation found."""

    holds: bool
    violation: str | None = None

    def __bool__(self) -> bool:
        return self.holds


def check_assumption(instance: MarketInstance, which: int,
                     extra: dict | None = None) -> AssumptionCheck:
    """Test one of the four structural assumptions.

    1: productivity and cost orderings are strictly opposed on every task,
       and the max-effort ordering never contradicts the productivity one.
    2: F, C and max effort are constant across tasks for every worker.
    3: c_max <= g_min / e_u_max (declared bounds; override via ``extra``).
    4: every task quality lies outside the closed band [g_l, g_u].
    """
    F, C, E = instance.productivity, instance.cost, instance.max_effort
    n = instance.n_workers
    if which == 1:
        for x in range(n):
            for i in range(n):
                for k in range(i + 1, n):
                    df = F[i, x] - F[k, x]
                    dc = C[i, x] - C[k, x]
                    if df * dc >= 0:  # df != 0 by the distinctness invariant
                        return AssumptionCheck(
                            False,
                            f"workers ({i},{k}) on task {x}: productivity and "
                            f"cost are not strictly opposed")
                    if df * (E[i, x] - E[k, x]) < 0:
                        return AssumptionCheck(
                            False,
                            f"workers ({i},{k}) on task {x}: max-effort order "
                            f"contradicts productivity order")
        return AssumptionCheck(True)
    if which == 2:
        for name, M in (("productivity", F), ("cost", C), ("max effort", E)):
            for i in range(n):
                if not np.all(M[i] == M[i, 0]):
                    x = int(np.argmax(M[i] != M[i, 0]))
                    return AssumptionCheck(
                        False, f"worker {i}: {name} varies across tasks "
                               f"({M[i, 0]:g} != {M[i, x]:g} at task {x})")
        return AssumptionCheck(True)
    if which == 3:
        extra = extra or {}
        c_max = extra.get("c_max", instance.c_max)
        g_min = extra.get("g_min", instance.g_min)
        e_u = extra.get("e_u_max", instance.e_u_max)
        if c_max > g_min / e_u:
            return AssumptionCheck(
                False, f"c_max={c_max:g} exceeds g_min/e_u_max={g_min / e_u:g}")
        return AssumptionCheck(True)
    if which == 4:
        extra = extra or {}
        consts = derived_constants(instance)
        g_l = extra.get("g_l", consts.g_l)
        g_u = extra.get("g_u", consts.g_u)
        for x, gx in enumerate(instance.quality):
            if g_l <= gx <= g_u:
                return AssumptionCheck(
                    False, f"task {x}: quality {gx:g} lies inside [{g_l:g}, {g_u:g}]")
        return AssumptionCheck(True)
    raise ValueError(f"unknown assumption {which!r}")
