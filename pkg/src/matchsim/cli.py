"""Scenario-driven command line front end.

Subcommands: ``simulate``, ``verify``, ``reproduce``, ``generate-instance``,
``sweep``. A scenario is a single YAML document; the only positional
arguments are the subcommand, the config path, and trailing ``key=value``
overrides (dotted paths into the document). ``MATCHSIM_SEED`` overrides the
config seed. Exit codes: 0 pass, 1 verdict failure, 2 config error,
3 runtime error.

Every emitted file carries the tool version and a hash of the effective
config: as a ``#`` header line in CSV/text files, as a ``_meta`` object in
JSON, and as a first meta-record in JSONL.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .analysis import (check_best_response, check_long_run_stability,
                       bbe_closed_form, check_prop3_optimality,
                       measure_regret_scaling,
                       run_appendix_i_comparison, run_theta_bound_experiment)
from .engine import FINITE_AVERAGE, LIMIT, long_run_values, replicate
from .errors import AssumptionViolatedError, MatchsimError
from .instances import (counterexample_instance, manipulation_instance,
                        rate_experiment_instance)
from .market import (GenerationConfig, MarketInstance, NoiseModel,
                     derived_constants, generate_instance)
from .mechanisms import (AVERAGE_OUTPUT, FILI, IILI, INITIAL_BELIEF,
                         OUTPUT_ONLY, run_baseline_average_output,
                         run_baseline_initial_belief, run_baseline_output_only,
                         run_fili, run_iili)
from .payments import PaymentRule
from .strategies import (MTBB, ConstantEffort, StochasticMTBB, Tabular,
                         mtbb_profile)


class ConfigError(MatchsimError):
    def __init__(self, key: str, message: str) -> None:
        super().__init__(f"config: {key}: {message}")
        self.key = key


# --- config loading ----------------------------------------------------------

_MECHANISM_KINDS = {
    "fili": FILI, FILI: FILI,
    "iili": IILI, IILI: IILI,
    INITIAL_BELIEF: INITIAL_BELIEF,
    AVERAGE_OUTPUT: AVERAGE_OUTPUT,
    OUTPUT_ONLY: OUTPUT_ONLY,
}

_STRATEGY_KINDS = ("mtbb", "stochastic-mtbb", "zero-effort", "constant-effort",
                   "tabular")


@dataclass
class Scenario:
    """A validated scenario: the normalized document plus constructed parts."""

    raw: dict
    seed: int
    output_dir: Path
    instance: MarketInstance
    mechanism_kind: str
    horizon: int
    sub_phase_length: int | None
    payment: PaymentRule
    noise: NoiseModel | None
    strategy_spec: object
    beliefs: list | None
    mode: str
    analysis: list

    def config_hash(self) -> str:
        text = json.dumps(self.raw, sort_keys=True, default=str)
        return hashlib.sha256(text.encode()).hexdigest()[:12]

    def header(self) -> str:
        return f"# matchsim {__version__} config={self.config_hash()}"

    def meta(self) -> dict:
        return {"tool": "matchsim", "version": __version__,
                "config": self.config_hash()}

    def build_strategies(self):
        return _build_strategies(self.strategy_spec, self.instance,
                                 self.payment, self.noise)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.raw, sort_keys=True)


def _require(d: dict, key: str, path: str):
    if key not in d:
        raise ConfigError(f"{path}.{key}" if path else key, "missing required key")
    return d[key]


def _as_type(value, types, path, what):
    if not isinstance(value, types) or isinstance(value, bool):
        raise ConfigError(path, f"expected {what}, got {value!r}")
    return value


def apply_overrides(doc: dict, overrides: list[str]) -> dict:
    """Apply ``a.b.c=value`` overrides; values parse as YAML scalars."""
    for item in overrides:
        if "=" not in item:
            raise ConfigError(item, "override must look like key=value")
        key, _, raw_value = item.partition("=")
        value = yaml.safe_load(raw_value)
        node = doc
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(key, f"cannot descend through {part!r}")
        node[parts[-1]] = value
    return doc


def _build_instance(spec: dict, path: str) -> MarketInstance:
    sources = [k for k in ("file", "inline", "generate") if k in spec]
    if len(sources) != 1:
        raise ConfigError(path, "exactly one of file/inline/generate required")
    src = sources[0]
    if src == "file":
        fpath = Path(spec["file"])
        if not fpath.exists():
            raise ConfigError(f"{path}.file", f"no such file: {fpath}")
        text = fpath.read_text()
        if fpath.suffix == ".json":
            return MarketInstance.from_json(text)
        return MarketInstance.from_text(text)
    if src == "inline":
        d = _as_type(spec["inline"], dict, f"{path}.inline", "a mapping")
        n = len(_require(d, "quality", f"{path}.inline"))
        max_effort = d.get("max_effort", 1.0)
        if isinstance(max_effort, (int, float)):
            max_effort = np.full((n, n), float(max_effort))
        try:
            return MarketInstance(
                productivity=np.array(_require(d, "productivity", f"{path}.inline"), float),
                cost=np.array(_require(d, "cost", f"{path}.inline"), float),
                quality=np.array(d["quality"], float),
                max_effort=np.asarray(max_effort, float),
                effort_step=float(d.get("effort_step", 1.0)))
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{path}.inline", str(exc)) from exc
    d = _as_type(spec["generate"], dict, f"{path}.generate", "a mapping")
    try:
        cfg = GenerationConfig(
            n_workers=_require(d, "n_workers", f"{path}.generate"),
            productivity_upper_1=_require(d, "productivity_upper_1", f"{path}.generate"),
            productivity_upper_2=_require(d, "productivity_upper_2", f"{path}.generate"),
            cost_intercept=_require(d, "cost_intercept", f"{path}.generate"),
            cost_slope=_require(d, "cost_slope", f"{path}.generate"),
            quality_offset=_require(d, "quality_offset", f"{path}.generate"),
            quality_scale=_require(d, "quality_scale", f"{path}.generate"),
            shared_max_effort=d.get("shared_max_effort", 1.0),
            effort_step=d.get("effort_step", 1.0),
            seed=d.get("seed", 0))
        return generate_instance(cfg)
    except MatchsimError as exc:
        raise ConfigError(f"{path}.generate", str(exc)) from exc


def _build_payment(spec: dict, instance: MarketInstance, path: str) -> PaymentRule:
    d = _as_type(spec, dict, path, "a mapping")
    family = _require(d, "family", path)
    alpha = d.get("alpha")
    if alpha == "star":
        alpha = derived_constants(instance).alpha_star
    try:
        return PaymentRule(family, alpha=alpha, beta=d.get("beta"))
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def _build_noise(spec, n: int, path: str) -> NoiseModel | None:
    if spec is None:
        return None
    d = _as_type(spec, dict, path, "a mapping")
    variance = d.get("variance", 0.0)
    if isinstance(variance, (int, float)):
        variances = np.full((n, n), float(variance))
    else:
        variances = np.array(variance, float)
        if variances.shape != (n, n):
            raise ConfigError(f"{path}.variance", f"expected scalar or {n}x{n} matrix")
    try:
        return NoiseModel(variances, family=d.get("family", "gaussian"),
                          seed=d.get("seed", 0))
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def _build_strategies(spec, instance, payment, noise):
    n = instance.n_workers
    if spec in (None, "mtbb"):
        return mtbb_profile(instance)
    if spec == "stochastic-mtbb":
        if payment.alpha is None:
            raise ConfigError("strategies",
                              "stochastic-mtbb needs a quadratic-family payment")
        return [StochasticMTBB.for_instance(instance, i, payment.alpha)
                for i in range(n)]
    if spec == "zero-effort":
        return [ConstantEffort.for_instance(instance, i, 0.0) for i in range(n)]
    built = {}
    for k, entry in enumerate(spec):
        path = f"strategies[{k}]"
        d = _as_type(entry, dict, path, "a mapping")
        worker = _require(d, "worker", path)
        kind = _require(d, "kind", path)
        if kind not in _STRATEGY_KINDS:
            raise ConfigError(f"{path}.kind", f"unknown kind {kind!r}; "
                                              f"choose from {_STRATEGY_KINDS}")
        if kind == "mtbb":
            built[worker] = MTBB.for_instance(instance, worker)
        elif kind == "stochastic-mtbb":
            if payment.alpha is None:
                raise ConfigError(f"{path}.kind",
                                  "stochastic-mtbb needs a quadratic-family payment")
            built[worker] = StochasticMTBB.for_instance(instance, worker, payment.alpha)
        elif kind == "zero-effort":
            built[worker] = ConstantEffort.for_instance(instance, worker, 0.0)
        elif kind == "constant-effort":
            built[worker] = ConstantEffort.for_instance(
                instance, worker, _require(d, "level", path))
        else:
            built[worker] = Tabular(
                worker=worker,
                assessment_efforts=tuple(_require(d, "assessment_efforts", path)),
                reported_list=tuple(_require(d, "reported_list", path)),
                operational_effort=_require(d, "operational_effort", path),
            ).bind(instance)
    missing = [i for i in range(n) if i not in built]
    if missing:
        raise ConfigError("strategies", f"no strategy for workers {missing}")
    return [built[i] for i in range(n)]


def load_scenario(path: str, overrides: list[str] | None = None) -> Scenario:
    try:
        doc = yaml.safe_load(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(path, "no such config file") from exc
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}" if mark else "unknown location"
        raise ConfigError(path, f"YAML parse error at {where}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(path, "config document must be a mapping")
    doc = apply_overrides(doc, overrides or [])

    seed = doc.get("seed", 0)
    env_seed = os.environ.get("MATCHSIM_SEED")
    if env_seed is not None:
        try:
            seed = int(env_seed)
        except ValueError as exc:
            raise ConfigError("MATCHSIM_SEED", f"not an integer: {env_seed!r}") from exc
        doc["seed"] = seed
    _as_type(seed, int, "seed", "an integer")

    instance = _build_instance(_as_type(_require(doc, "instance", ""), dict,
                                        "instance", "a mapping"), "instance")
    mech = _as_type(_require(doc, "mechanism", ""), dict, "mechanism", "a mapping")
    kind_raw = _require(mech, "kind", "mechanism")
    if kind_raw not in _MECHANISM_KINDS:
        raise ConfigError("mechanism.kind",
                          f"unknown kind {kind_raw!r}; choose from "
                          f"{sorted(set(_MECHANISM_KINDS.values()))}")
    kind = _MECHANISM_KINDS[kind_raw]
    horizon = _as_type(_require(mech, "horizon", "mechanism"), int,
                       "mechanism.horizon", "an integer")
    sub_phase = mech.get("sub_phase_length")
    payment = _build_payment(_require(doc, "payment", ""), instance, "payment")
    noise = _build_noise(doc.get("noise"), instance.n_workers, "noise")

    n = instance.n_workers
    if kind == IILI:
        if noise is None:
            raise ConfigError("noise", "the IILI mechanism requires a noise block")
        if sub_phase is None:
            raise ConfigError("mechanism.sub_phase_length", "required for IILI")
        if horizon < n * sub_phase + 2:
            raise ConfigError("mechanism.horizon",
                              f"IILI needs horizon >= N*L+2 = {n * sub_phase + 2}")
        if sub_phase * sub_phase > horizon:
            raise ConfigError("mechanism.sub_phase_length",
                              f"needs sub_phase_length**2 <= horizon, got "
                              f"{sub_phase}**2 > {horizon}")
    if kind == FILI and horizon < n + 2:
        raise ConfigError("mechanism.horizon", f"FILI needs horizon >= N+2 = {n + 2}")
    if kind in (AVERAGE_OUTPUT, OUTPUT_ONLY) and horizon < n + 1:
        raise ConfigError("mechanism.horizon", f"{kind} needs horizon >= N+1 = {n + 1}")

    beliefs = doc.get("beliefs")
    if kind == INITIAL_BELIEF:
        if beliefs is None:
            raise ConfigError("beliefs", "the initial-belief mechanism needs beliefs")
        if len(beliefs) != n:
            raise ConfigError("beliefs", f"expected {n} entries, got {len(beliefs)}")

    mode = doc.get("mode", LIMIT)
    if mode not in (LIMIT, FINITE_AVERAGE):
        raise ConfigError("mode", f"expected '{LIMIT}' or '{FINITE_AVERAGE}'")
    analysis = doc.get("analysis", [])
    if not isinstance(analysis, list):
        raise ConfigError("analysis", "expected a list of checks")
    for k, entry in enumerate(analysis):
        if not isinstance(entry, dict) or entry.get("check") not in (
                "stability", "efficiency", "equilibrium", "prop3"):
            raise ConfigError(f"analysis[{k}]",
                              "expected {check: stability|efficiency|"
                              "equilibrium|prop3, ...}")
    replicates = doc.get("replicates", 1)
    if not isinstance(replicates, int) or replicates < 1:
        raise ConfigError("replicates", f"expected a positive integer, got "
                                        f"{replicates!r}")

    scenario = Scenario(
        raw=doc, seed=seed, output_dir=Path(doc.get("output_dir", "out")),
        instance=instance, mechanism_kind=kind, horizon=horizon,
        sub_phase_length=sub_phase, payment=payment, noise=noise,
        strategy_spec=doc.get("strategies", "mtbb"), beliefs=beliefs,
        mode=mode, analysis=analysis)
    # cross-field checks that need the instance, e.g. the participation cap
    if payment.alpha is not None:
        cap = derived_constants(instance).alpha_star
        if payment.alpha > cap * (1 + 1e-12):
            raise ConfigError("payment.alpha",
                              f"{payment.alpha:g} violates the participation cap "
                              f"1/(2*W_max) = {cap:g}")
    return scenario


def run_scenario(scenario: Scenario, seed: int | None = None):
    """Run the configured mechanism once; ``seed`` reseeds the run-level
    randomness (noise streams, belief tie-breaking) for replication."""
    seed = scenario.seed if seed is None else seed
    strategies = scenario.build_strategies()
    kind = scenario.mechanism_kind
    if kind == FILI:
        return run_fili(scenario.instance, scenario.payment, strategies,
                        scenario.horizon)
    if kind == IILI:
        noise = dataclasses.replace(scenario.noise, seed=seed)
        return run_iili(scenario.instance, noise, scenario.payment,
                        strategies, scenario.horizon, scenario.sub_phase_length)
    if kind == INITIAL_BELIEF:
        return run_baseline_initial_belief(scenario.instance, scenario.beliefs,
                                           scenario.payment, strategies,
                                           scenario.horizon, seed=seed)
    if kind == AVERAGE_OUTPUT:
        return run_baseline_average_output(scenario.instance, scenario.payment,
                                           strategies, scenario.horizon)
    return run_baseline_output_only(scenario.instance, scenario.payment,
                                    strategies, scenario.horizon)


# --- output helpers ----------------------------------------------------------

def _write_csv(path: Path, header_line: str, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(header_line + "\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        writer.writerows(rows)


def _write_json(path: Path, meta: dict, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump({"_meta": meta, **payload}, fh, indent=2)
        fh.write("\n")


def write_svg_lines(path: Path, series: dict, *, title: str,
                    x_label: str, y_label: str) -> None:
    """Minimal self-contained SVG line chart: series maps a name to a list of
    (x, y) points."""
    width, height, margin = 640, 420, 56
    xs = [x for pts in series.values() for x, _ in pts]
    ys = [y for pts in series.values() for _, y in pts]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    y_lo, y_hi = (y_lo - 1, y_hi + 1) if y_lo == y_hi else (y_lo, y_hi)

    def sx(x):
        return margin + (x - x_lo) / (x_hi - x_lo or 1) * (width - 2 * margin)

    def sy(y):
        return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin)

    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"]
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<text x="{width / 2}" y="20" text-anchor="middle" '
             f'font-family="sans-serif" font-size="14">{title}</text>',
             f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
             f'y2="{height - margin}" stroke="black"/>',
             f'<line x1="{margin}" y1="{margin}" x2="{margin}" '
             f'y2="{height - margin}" stroke="black"/>',
             f'<text x="{width / 2}" y="{height - 12}" text-anchor="middle" '
             f'font-family="sans-serif" font-size="12">{x_label}</text>',
             f'<text x="16" y="{height / 2}" text-anchor="middle" '
             f'font-family="sans-serif" font-size="12" '
             f'transform="rotate(-90 16 {height / 2})">{y_label}</text>']
    for k, (name, pts) in enumerate(sorted(series.items())):
        color = palette[k % len(palette)]
        coords = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in sorted(pts))
        parts.append(f'<polyline points="{coords}" fill="none" '
                     f'stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{width - margin + 4}" '
                     f'y="{margin + 16 * k + 10}" font-family="sans-serif" '
                     f'font-size="11" fill="{color}">{name}</text>')
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n")


# --- subcommands --------------------------------------------------------------

def cmd_simulate(args) -> int:
    scenario = load_scenario(args.config, args.overrides)
    scenario.output_dir.mkdir(parents=True, exist_ok=True)
    result = run_scenario(scenario)
    report = long_run_values(result.trace, scenario.mode)

    header = scenario.header()
    trace_csv = scenario.output_dir / "trace.csv"
    with open(trace_csv, "w", newline="") as fh:
        fh.write(header + "\n")
        writer = csv.writer(fh)
        from .engine import TRACE_COLUMNS
        writer.writerow(TRACE_COLUMNS)
        for r in result.trace.records:
            writer.writerow([getattr(r, c) for c in TRACE_COLUMNS])
    trace_jsonl = scenario.output_dir / "trace.jsonl"
    with open(trace_jsonl, "w") as fh:
        fh.write(json.dumps(scenario.meta()) + "\n")
        from .engine import TRACE_COLUMNS
        for r in result.trace.records:
            fh.write(json.dumps({c: getattr(r, c) for c in TRACE_COLUMNS}) + "\n")
    _write_json(scenario.output_dir / "report.json", scenario.meta(),
                report.to_dict())
    print(f"final matching: {list(result.final_matching.assignment)}")
    print(f"report written to {scenario.output_dir}")
    return 0


def cmd_verify(args) -> int:
    scenario = load_scenario(args.config, args.overrides)
    scenario.output_dir.mkdir(parents=True, exist_ok=True)
    check = args.check
    verdict: dict = {"check": check}
    code = 0
    try:
        if check == "stability":
            result = run_scenario(scenario)
            report = long_run_values(result.trace, LIMIT)
            sv = check_long_run_stability(scenario.instance, scenario.payment,
                                          result.final_matching, report)
            verdict["stable"] = sv.stable
            verdict["blocking_pairs"] = [
                {"worker": b.worker, "task": b.task, "effort": b.effort,
                 "worker_gain": b.worker_gain, "client_gain": b.client_gain}
                for b in sv.blocking_pairs]
            if not sv.stable:
                for b in sv.blocking_pairs:
                    print(f"blocking pair: worker {b.worker}, task {b.task}, "
                          f"witness effort {b.effort:g} "
                          f"(gains {b.worker_gain:g}, {b.client_gain:g})")
                code = 1
        elif check == "equilibrium":
            instances = [scenario.instance]
            if args.instances > 1:
                gen = scenario.raw.get("instance", {}).get("generate")
                if gen is None:
                    raise ConfigError("instance.generate",
                                      "--instances > 1 needs a generated instance")
                seeds = np.random.SeedSequence(scenario.seed).spawn(args.instances - 1)
                for child in seeds:
                    spec = {"generate": dict(gen, seed=int(child.generate_state(1)[0]))}
                    instances.append(_build_instance(spec, "instance"))
            failures = []
            for k, inst in enumerate(instances):
                for worker in range(inst.n_workers):
                    for others in ("mtbb", "zero-effort"):
                        br = check_best_response(inst, scenario.payment, worker,
                                                 others, cap=args.cap)
                        if not br.is_mtbb_best:
                            failures.append((k, worker, others,
                                             br.best_value - br.mtbb_value))
            verdict["instances"] = len(instances)
            verdict["failures"] = failures
            if failures:
                for k, worker, others, gap in failures:
                    print(f"strict improvement on instance {k}, worker {worker} "
                          f"vs {others}: +{gap:g}")
                code = 1
        elif check == "efficiency":
            try:
                eff = bbe_closed_form(scenario.instance,
                                      scenario.payment.alpha
                                      or derived_constants(scenario.instance).alpha_star)
            except AssumptionViolatedError:
                if not args.waive_assumptions:
                    raise
                verdict["skipped"] = "assumptions waived"
                eff = None
            if eff is not None:
                result = run_fili(scenario.instance, scenario.payment,
                                  scenario.build_strategies(),
                                  scenario.instance.n_workers + 2)
                rep = long_run_values(result.trace, LIMIT)
                gap = abs(rep.total_revenue - eff.bbe_revenue)
                verdict.update(closed_form_revenue=eff.bbe_revenue,
                               engine_revenue=rep.total_revenue,
                               ratio_revenue=eff.ratio_revenue,
                               ratio_profit=eff.ratio_profit, gap=gap)
                if gap > 1e-9:
                    print(f"closed form disagrees with the engine by {gap:g}")
                    code = 1
        elif check == "prop3":
            rep = check_prop3_optimality(scenario.instance)
            verdict.update(optimal=rep.optimal, grid_maximum=rep.grid_maximum,
                           mechanism_revenue=rep.mechanism_revenue)
            if not rep.optimal:
                print(f"grid maximum {rep.grid_maximum:g} exceeds mechanism "
                      f"revenue {rep.mechanism_revenue:g}")
                code = 1
        else:
            raise ConfigError("check", f"unknown check {check!r}")
    except AssumptionViolatedError as exc:
        if not args.waive_assumptions:
            print(f"assumption violation: {exc}", file=sys.stderr)
            return 2
        verdict["skipped"] = str(exc)
    _write_json(scenario.output_dir / f"verify_{check}.json", scenario.meta(),
                verdict)
    print(f"{check}: {'PASS' if code == 0 else 'FAIL'}")
    return code


def cmd_generate_instance(args) -> int:
    scenario = load_scenario(args.config, args.overrides)
    out = Path(args.out) if args.out else scenario.output_dir / "instance"
    out.parent.mkdir(parents=True, exist_ok=True)
    text_path = out.with_suffix(".txt")
    text_path.write_text(scenario.header() + "\n" + scenario.instance.to_text())
    _write_json(out.with_suffix(".json"), scenario.meta(),
                scenario.instance.to_dict())
    print(f"instance written to {text_path} and {out.with_suffix('.json')}")
    return 0


def cmd_sweep(args) -> int:
    scenario = load_scenario(args.config, args.overrides)
    scenario.output_dir.mkdir(parents=True, exist_ok=True)
    family = args.family or scenario.payment.family
    alpha_star = derived_constants(scenario.instance).alpha_star
    if family in ("quadratic", "stochastic-quadratic"):
        grid = np.linspace(alpha_star / args.points, alpha_star, args.points)
        make = (PaymentRule.stochastic_quadratic
                if scenario.mechanism_kind == IILI else PaymentRule.quadratic)
        rules = [make(float(a)) for a in grid]
    elif family == "linear":
        if scenario.mechanism_kind == IILI:
            raise ConfigError("family", "the IILI mechanism settles with the "
                                        "stochastic-quadratic family only")
        grid = np.linspace(0.0, 1.0, args.points)
        rules = [PaymentRule.linear(float(b)) for b in grid]
    else:
        raise ConfigError("family", f"cannot sweep family {family!r}")
    rows = []
    for param, rule in zip(grid, rules):
        sc = replace(scenario, payment=rule)
        result = run_scenario(sc)
        rep = long_run_values(result.trace, LIMIT)
        rows.append([repr(float(param)), repr(rep.total_revenue),
                     repr(rep.total_profit)])
    out = scenario.output_dir / f"sweep_{family}.csv"
    _write_csv(out, scenario.header(), ["param", "revenue", "profit"], rows)
    print(f"sweep written to {out}")
    return 0


# --- canned reproductions ------------------------------------------------------

def _passfail(label: str, ok: bool) -> bool:
    print(f"[{'PASS' if ok else 'FAIL'}] {label}")
    return ok


def _reproduce_counterexample(out: Path, params: dict) -> bool:
    inst = counterexample_instance()
    pay = PaymentRule.quadratic(derived_constants(inst).alpha_star)
    fili = run_fili(inst, pay, mtbb_profile(inst), horizon=10)
    fili_rep = long_run_values(fili.trace, LIMIT)
    fili_sv = check_long_run_stability(inst, pay, fili.final_matching, fili_rep)
    avg = run_baseline_average_output(inst, pay, mtbb_profile(inst), horizon=10)
    avg_rep = long_run_values(avg.trace, LIMIT)
    avg_sv = check_long_run_stability(inst, pay, avg.final_matching, avg_rep)

    ok = _passfail("rotation rule matches worker 0 to task 0 and is stable",
                   fili.final_matching.assignment == (0, 1) and fili_sv.stable)
    ok &= _passfail("average-output rule swaps the matching and admits a "
                    "blocking pair",
                    avg.final_matching.assignment == (1, 0)
                    and len(avg_sv.blocking_pairs) >= 1)
    rows = [["rotation", list(fili.final_matching.assignment), fili_sv.stable,
             fili_rep.total_revenue, fili_rep.total_profit],
            ["average-output", list(avg.final_matching.assignment), avg_sv.stable,
             avg_rep.total_revenue, avg_rep.total_profit]]
    _write_csv(out / "counterexample_223.csv", f"# matchsim {__version__}",
               ["mechanism", "matching", "stable", "revenue", "profit"], rows)
    return ok


def _reproduce_appendix_h(out: Path, params: dict) -> bool:
    inst = manipulation_instance()
    pay = PaymentRule.quadratic(derived_constants(inst).alpha_star)
    honest = run_baseline_output_only(inst, pay, mtbb_profile(inst), horizon=6)
    dev = Tabular(worker=0, assessment_efforts=(1.0, 0.0), reported_list=(0, 1),
                  operational_effort=1.0).bind(inst)
    sandbag = run_baseline_output_only(
        inst, pay, [dev, MTBB.for_instance(inst, 1)], horizon=6)
    ok = _passfail("output-only matcher: sandbagging task 1 moves worker 0 "
                   "from task 1 to task 0",
                   honest.final_matching[0] == 1 and sandbag.final_matching[0] == 0)

    # under the rotation rule, no deviation gets worker 0 a task it truly
    # prefers (truthful order: task 0 first, given U(0,0) > U(0,1))
    from .strategies import enumerate_payoff_relevant_strategies
    from .analysis import _matching_from_artifacts
    fili_honest = run_fili(inst, pay, mtbb_profile(inst), horizon=4)
    truthful = MTBB.for_instance(inst, 0)
    for rec in [r for r in fili_honest.trace.records if r.worker == 0
                and r.phase == "assessment"]:
        truthful.observe(rec.t, rec.phase, rec.task, rec.payment,
                         rec.payment - rec.worker_utility)
    true_order = truthful.report()
    base_rank = true_order.index(fili_honest.final_matching[0])
    w_e = fili_honest.assessed_outputs.copy()
    reports = list(fili_honest.reports)
    best_rank = base_rank
    for tab in enumerate_payoff_relevant_strategies(0, inst):
        w_e[0] = inst.productivity[0] * np.asarray(tab.assessment_efforts)
        reports[0] = tab.reported_list
        task = _matching_from_artifacts(w_e, reports)[0]
        best_rank = min(best_rank, true_order.index(task))
    ok &= _passfail("rotation rule: exhaustive deviations never improve "
                    "worker 0's match", best_rank >= base_rank)
    rows = [["output-only/all-max", list(honest.final_matching.assignment)],
            ["output-only/sandbag-task-1", list(sandbag.final_matching.assignment)],
            ["rotation/all-max", list(fili_honest.final_matching.assignment)]]
    _write_csv(out / "appendix_h.csv", f"# matchsim {__version__}",
               ["scenario", "matching"], rows)
    return ok


def _reproduce_theta_bound(out: Path, params: dict) -> bool:
    cfg = GenerationConfig(
        n_workers=int(params.get("n_workers", 3)),
        productivity_upper_1=20.0, productivity_upper_2=20.0,
        cost_intercept=2.0, cost_slope=0.05, quality_offset=2.0,
        quality_scale=10.0, shared_max_effort=1.0, effort_step=1.0)
    n_instances = int(params.get("n_instances", 2000))
    rep = run_theta_bound_experiment(cfg, n_instances, seed=int(params.get("seed", 0)))
    print(f"theta = {rep.theta:.6f}")
    print(f"revenue ratio {rep.ratio_revenue:.6f} (99% LCB {rep.lcb_revenue:.6f})")
    print(f"profit ratio {rep.ratio_profit:.6f} (99% LCB {rep.lcb_profit:.6f})")
    ok = _passfail("revenue ratio >= theta at one-sided 99% confidence",
                   rep.lcb_revenue >= rep.theta)
    ok &= _passfail("profit ratio >= theta/2 at one-sided 99% confidence",
                    rep.lcb_profit >= rep.theta / 2)
    _write_csv(out / "theta_bound.csv", f"# matchsim {__version__}",
               ["theta", "ratio_revenue", "lcb_revenue", "ratio_profit",
                "lcb_profit", "n_instances"],
               [[rep.theta, rep.ratio_revenue, rep.lcb_revenue,
                 rep.ratio_profit, rep.lcb_profit, rep.n_instances]])
    return ok


def _reproduce_regret_scaling(out: Path, params: dict) -> bool:
    inst = rate_experiment_instance()
    noise = NoiseModel.constant(inst.n_workers,
                                float(params.get("variance", 1.0)),
                                seed=int(params.get("seed", 11)))
    horizons = params.get("horizons", [10_000, 40_000, 160_000])
    n_runs = int(params.get("n_runs", 200))
    rep = measure_regret_scaling(inst, noise, horizons, n_runs,
                                 seed=int(params.get("seed", 11)))
    for p in rep.points:
        print(f"T={p.horizon}: regret {p.mean_regret:.6f} "
              f"(se {p.stderr_regret:.2g}), revenue ratio "
              f"{p.mean_revenue_ratio:.6f} (se {p.stderr_revenue_ratio:.2g})")
    print(f"log-log slope: {rep.slope:.4f}")
    ok = _passfail("regret slope within [-0.65, -0.35]",
                   -0.65 <= rep.slope <= -0.35)
    z = 2.326
    monotone = all(
        b.mean_revenue_ratio + z * b.stderr_revenue_ratio
        >= a.mean_revenue_ratio - z * a.stderr_revenue_ratio
        for a, b in zip(rep.points, rep.points[1:]))
    ok &= _passfail("revenue ratio monotone non-decreasing within 99% CI",
                    monotone)
    _write_csv(out / "regret_scaling.csv", f"# matchsim {__version__}",
               ["horizon", "sub_phase_length", "mean_regret", "stderr_regret",
                "mean_revenue_ratio", "stderr_revenue_ratio"],
               [[p.horizon, p.sub_phase_length, p.mean_regret, p.stderr_regret,
                 p.mean_revenue_ratio, p.stderr_revenue_ratio]
                for p in rep.points])
    return ok


def _reproduce_fig2(out: Path, params: dict) -> bool:
    n_values = params.get("n_values", list(range(10, 101, 10)))
    n_instances = int(params.get("n_instances", 50))
    rows = []
    plot_rows = []
    ok = True
    sums = {"prop_rev": 0.0, "base_rev": 0.0, "prop_pr": 0.0, "base_pr": 0.0}
    for n in n_values:
        cfg = GenerationConfig(
            n_workers=int(n), productivity_upper_1=20.0,
            productivity_upper_2=14.0, cost_intercept=2.0, cost_slope=0.05,
            quality_offset=2.0, quality_scale=10.0, shared_max_effort=1.0,
            effort_step=1.0, seed=int(params.get("seed", 0)) + int(n))
        row = run_appendix_i_comparison(cfg, n_instances,
                                        grid_points=int(params.get("grid_points", 50)))
        rows.append(row)
        sums["prop_rev"] += row.proposed.revenue_mean
        sums["base_rev"] += row.baseline.revenue_mean
        sums["prop_pr"] += row.proposed.profit_mean
        sums["base_pr"] += row.baseline.profit_mean
        ok &= _passfail(
            f"N={n}: proposed mean revenue {row.proposed.revenue_mean:.1f} > "
            f"baseline {row.baseline.revenue_mean:.1f} and stable on all "
            f"{row.n_instances} instances",
            row.proposed.revenue_mean > row.baseline.revenue_mean
            and row.proposed_stable_all)
        for series, cell in (("proposed", row.proposed), ("baseline", row.baseline)):
            plot_rows.append([n, series, repr(cell.revenue_mean),
                              repr(cell.revenue_stderr), repr(cell.profit_mean),
                              repr(cell.profit_stderr)])
        plot_rows.append([n, "upper-bound", repr(row.upper_bound_mean), "0.0",
                          repr(row.upper_bound_mean), "0.0"])
    rev_gain = sums["prop_rev"] / sums["base_rev"] - 1.0
    pr_gain = sums["prop_pr"] / sums["base_pr"] - 1.0
    ub_total = sum(r.upper_bound_mean for r in rows)
    ub_frac = sums["prop_rev"] / ub_total
    print(f"overall gain over the baseline: revenue {rev_gain:.1%}, "
          f"profit {pr_gain:.1%}; proposed recovers {ub_frac:.1%} of the "
          f"obedient upper bound (reference claim: over 75%)")
    _write_csv(out / "fig2_comparison.csv", f"# matchsim {__version__}",
               ["n_workers", "mechanism", "revenue_mean", "revenue_stderr",
                "profit_mean", "profit_stderr"], plot_rows)
    series_rev = {}
    for r in rows:
        series_rev.setdefault("proposed", []).append((r.n_workers, r.proposed.revenue_mean))
        series_rev.setdefault("baseline", []).append((r.n_workers, r.baseline.revenue_mean))
        series_rev.setdefault("upper-bound", []).append((r.n_workers, r.upper_bound_mean))
    write_svg_lines(out / "fig2_revenue.svg", series_rev,
                    title="Mechanism comparison: mean total long-run revenue",
                    x_label="number of workers", y_label="revenue")
    return ok


_REPRODUCE_TARGETS = {
    "counterexample-223": _reproduce_counterexample,
    "appendix-h": _reproduce_appendix_h,
    "theta-bound": _reproduce_theta_bound,
    "regret-scaling": _reproduce_regret_scaling,
    "fig2": _reproduce_fig2,
}


def cmd_reproduce(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    params = {}
    for item in args.overrides:
        if "=" not in item:
            raise ConfigError(item, "override must look like key=value")
        key, _, value = item.partition("=")
        params[key] = yaml.safe_load(value)
    ok = _REPRODUCE_TARGETS[args.target](out, params)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matchsim",
        description="Simulate and analyze repeated assessment-matching markets")
    parser.add_argument("--version", action="version",
                        version=f"matchsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a scenario and write traces")
    p_sim.add_argument("config")
    p_sim.add_argument("overrides", nargs="*", help="key=value overrides")
    p_sim.set_defaults(func=cmd_simulate)

    p_ver = sub.add_parser("verify", help="run a checker and exit by verdict")
    p_ver.add_argument("config")
    p_ver.add_argument("--check", required=True,
                       choices=["equilibrium", "stability", "efficiency", "prop3"])
    p_ver.add_argument("--instances", type=int, default=1,
                       help="verify over this many generated instances")
    p_ver.add_argument("--cap", type=int, default=10_000_000,
                       help="deviation enumeration cap")
    p_ver.add_argument("--waive-assumptions", action="store_true")
    p_ver.add_argument("overrides", nargs="*", help="key=value overrides")
    p_ver.set_defaults(func=cmd_verify)

    p_rep = sub.add_parser("reproduce", help="run a canned study end to end")
    p_rep.add_argument("target", choices=sorted(_REPRODUCE_TARGETS))
    p_rep.add_argument("--out", default="out")
    p_rep.add_argument("overrides", nargs="*", help="key=value overrides")
    p_rep.set_defaults(func=cmd_reproduce)

    p_gen = sub.add_parser("generate-instance", help="write a drawn instance")
    p_gen.add_argument("config")
    p_gen.add_argument("--out", default=None)
    p_gen.add_argument("overrides", nargs="*", help="key=value overrides")
    p_gen.set_defaults(func=cmd_generate_instance)

    p_swp = sub.add_parser("sweep", help="sweep a payment parameter grid")
    p_swp.add_argument("config")
    p_swp.add_argument("--family", choices=["quadratic", "linear"], default=None)
    p_swp.add_argument("--points", type=int, default=50)
    p_swp.add_argument("overrides", nargs="*", help="key=value overrides")
    p_swp.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    stray = [e for e in extra if "=" not in e]
    if stray:
        parser.error(f"unrecognized arguments: {' '.join(stray)}")
    args.overrides = list(getattr(args, "overrides", []) or []) + extra
    try:
        return args.func(args)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except MatchsimError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
