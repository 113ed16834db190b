"""The optimization loops: guided/standard/annealed BO, trust-region BO, MOBO.

Every loop consumes the same pre-evaluated initial samples, owns a fresh
simulator whose drift clock starts after them, and records each
evaluation into a :class:`~guidedbo.trace.TrialTrace`.  The scalarized
loops share one code path parameterized by (transform, schedule), so the
guided variant with an identity transform and a constant schedule is
bitwise identical to standard BO under the same seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .acquisition import (
    AnnealingSchedule,
    ParetoFront,
    ehvi_2d_batch,
    maximize_acquisition,
    ucb,
)
from .errors import ConfigError, NumericalFailure
from .objective import NormalizationBounds, ScalarizedObjective
from .simulator import Simulator, SimulatorConfig
from .surrogate import FitConfig, fit
from .trace import STATUS_FAILED, TrialTrace
from .transform import PairedTransform, transform_bounds

KINDS = (
    "domain_guided",
    "standard_bo",
    "turbo",
    "mobo",
    "transform_only",
    "annealing_only",
)

_TRANSFORM_KINDS = ("domain_guided", "transform_only")
_ANNEALED_KINDS = ("domain_guided", "annealing_only")


def default_schedule(kind: str) -> AnnealingSchedule | None:
    if kind == "mobo":
        return None
    if kind in _ANNEALED_KINDS:
        return AnnealingSchedule("reverse_linear", beta0=1.0, c=0.01)
    return AnnealingSchedule("constant", beta0=1.0, c=0.0)


@dataclass(frozen=True)
class TurboParams:
    """Trust-region state-machine constants (original published defaults)."""

    length_init: float = 0.8
    l_min: float = 0.5**7
    l_max: float = 1.6
    succ_tol: int = 3
    fail_tol: int | None = None  # None: use the input dimension
    improvement_rtol: float = 1e-3


class TrustRegionState:
    """Axis-aligned trust region resized by success/failure streaks.

    ``succ_tol`` consecutive improvements double the base length (capped
    at ``l_max``); ``fail_tol`` consecutive non-improvements halve it.
    Any resize resets both counters, so they are never both nonzero.  A
    halving that lands below ``l_min`` signals a restart.
    """

    def __init__(self, center: np.ndarray, params: TurboParams, fail_tol: int):
        self.center = np.asarray(center, dtype=float)
        self.params = params
        self.length = params.length_init
        self.succ_count = 0
        self.fail_count = 0
        self.succ_tol = params.succ_tol
        self.fail_tol = fail_tol

    def update(self, improved: bool) -> str:
        """Advance the state machine; returns 'none', 'expand', 'shrink' or 'restart'."""
        if improved:
            self.succ_count += 1
            self.fail_count = 0
            if self.succ_count >= self.succ_tol:
                self.length = min(2.0 * self.length, self.params.l_max)
                self.succ_count = 0
                return "expand"
            return "none"
        self.fail_count += 1
        self.succ_count = 0
        if self.fail_count >= self.fail_tol:
            self.length = self.length / 2.0
            self.fail_count = 0
            if self.length < self.params.l_min:
                return "restart"
            return "shrink"
        return "none"

    def reset(self, center: np.ndarray) -> None:
        self.center = np.asarray(center, dtype=float)
        self.length = self.params.length_init
        self.succ_count = 0
        self.fail_count = 0


@dataclass(frozen=True)
class OptimizerSpec:
    """One algorithm variant plus everything needed to rerun it exactly."""

    kind: str
    seed: int
    budget: int = 150
    n_init: int = 4
    schedule: AnnealingSchedule | None = None
    transform: PairedTransform | None = None
    acq_budget: int = 2000
    fit_starts_initial: int = 8
    fit_starts_refit: int = 1
    turbo: TurboParams = field(default_factory=TurboParams)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown optimizer kind {self.kind!r}")
        if self.kind in _TRANSFORM_KINDS and self.transform is None:
            raise ConfigError(f"{self.kind} requires a transform")
        if self.kind not in _TRANSFORM_KINDS and self.transform is not None:
            raise ConfigError(f"{self.kind} must not carry a transform")
        if self.n_init < 2:
            raise ConfigError(f"n_init must be >= 2, got {self.n_init}")
        if self.budget < self.n_init:
            raise ConfigError(
                f"budget ({self.budget}) must be >= n_init ({self.n_init})"
            )
        if self.schedule is None and self.kind != "mobo":
            object.__setattr__(self, "schedule", default_schedule(self.kind))


@dataclass(frozen=True)
class InitSample:
    """Shared initial design: points with their already-measured objectives."""

    points: np.ndarray  # (n, d) native coordinates
    E: np.ndarray
    I: np.ndarray

    def __len__(self) -> int:
        return self.points.shape[0]


def draw_initial_samples(sim_cfg: SimulatorConfig, n: int,
                         rng: np.random.Generator) -> np.ndarray:
    """Uniform design over the native box; evaluation happens at clock 0..n-1."""
    lower, upper = sim_cfg.box
    return rng.uniform(lower, upper, size=(n, sim_cfg.dim))


def evaluate_initial_samples(sim_cfg: SimulatorConfig, points: np.ndarray) -> InitSample:
    sim = Simulator(sim_cfg, start_clock=0)
    e = np.empty(len(points))
    i = np.empty(len(points))
    for j, p in enumerate(points):
        e[j], i[j] = sim.evaluate(p)
    return InitSample(points=np.asarray(points, float), E=e, I=i)


def _seed_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator, np.random.Generator]:
    acq_ss, fit_ss, restart_ss = np.random.SeedSequence(seed).spawn(3)
    return (
        np.random.default_rng(acq_ss),
        np.random.default_rng(fit_ss),
        np.random.default_rng(restart_ss),
    )


def _fit_config(spec: OptimizerSpec, iteration: int, fit_seed_rng, warm) -> FitConfig:
    # Full multi-start on the first fit and periodically after; in between a
    # warm start from the previous optimum keeps per-iteration refits cheap.
    if iteration == 0:
        n_starts = spec.fit_starts_initial
    elif iteration % 10 == 0:
        n_starts = max(spec.fit_starts_refit, 3)
    else:
        n_starts = spec.fit_starts_refit
    return FitConfig(
        n_starts=n_starts,
        seed=int(fit_seed_rng.integers(2**31 - 1)),
        warm_start=warm,
        max_iter=50 if iteration == 0 else 30,
    )


def _run_scalarized(spec: OptimizerSpec, sim_cfg: SimulatorConfig,
                    bounds: NormalizationBounds, init: InitSample,
                    trial_id: int = 0) -> TrialTrace:
    """Shared loop for every single-objective variant.

    The surrogate models the reward -f over the unit-normalized search
    box (native, or the bounding box of the transformed native box);
    candidates are inverse-mapped and clipped into the native box before
    evaluation, and the surrogate trains on the point actually evaluated.
    """
    trace = TrialTrace(spec.kind, trial_id=trial_id, seed=spec.seed, dim=sim_cfg.dim)
    sim = Simulator(sim_cfg, start_clock=len(init))
    obj = ScalarizedObjective(bounds)
    tfm = spec.transform
    native_lo, native_hi = sim_cfg.box
    if tfm is None:
        s_lo, s_hi = native_lo, native_hi
    else:
        s_lo, s_hi = transform_bounds(tfm, native_lo, native_hi)
    span = s_hi - s_lo

    X_unit: list[np.ndarray] = []
    rewards: list[float] = []
    for j in range(len(init)):
        point = init.points[j]
        fval = obj(init.E[j], init.I[j])
        trace.append(point, init.E[j], init.I[j], fval)
        mapped = point if tfm is None else tfm.forward(point)
        X_unit.append((mapped - s_lo) / span)
        rewards.append(-fval)

    acq_rng, fit_seed_rng, _ = _seed_streams(spec.seed)
    d = sim_cfg.dim
    unit_lo, unit_hi = np.zeros(d), np.ones(d)
    warm = None
    for it in range(spec.budget - len(init)):
        beta = spec.schedule.beta(it)
        try:
            surr = fit(np.asarray(X_unit), np.asarray(rewards),
                       _fit_config(spec, it, fit_seed_rng, warm))
        except NumericalFailure:
            trace.status = STATUS_FAILED
            return trace
        warm = surr.params

        def acq(batch):
            mean, var = surr.predict(batch)
            return ucb(mean, var, beta)

        incumbent = X_unit[int(np.argmax(rewards))]
        x_unit = maximize_acquisition(acq, unit_lo, unit_hi, acq_rng,
                                      budget=spec.acq_budget, seeds=incumbent)
        v = s_lo + x_unit * span
        native = v if tfm is None else tfm.inverse(v)
        native = np.clip(native, native_lo, native_hi)
        e, i = sim.evaluate(native)
        fval = obj(e, i)
        trace.append(native, e, i, fval, beta=beta)
        mapped = native if tfm is None else tfm.forward(native)
        X_unit.append((mapped - s_lo) / span)
        rewards.append(-fval)
    trace.clamp_events = obj.clamp_events
    return trace


def _run_turbo(spec: OptimizerSpec, sim_cfg: SimulatorConfig,
               bounds: NormalizationBounds, init: InitSample,
               trial_id: int = 0) -> TrialTrace:
    """Single-trust-region baseline in the native (un-transformed) space."""
    trace = TrialTrace(spec.kind, trial_id=trial_id, seed=spec.seed, dim=sim_cfg.dim)
    sim = Simulator(sim_cfg, start_clock=len(init))
    obj = ScalarizedObjective(bounds)
    native_lo, native_hi = sim_cfg.box
    span = native_hi - native_lo
    d = sim_cfg.dim

    X_unit: list[np.ndarray] = []
    rewards: list[float] = []
    for j in range(len(init)):
        point = init.points[j]
        fval = obj(init.E[j], init.I[j])
        trace.append(point, init.E[j], init.I[j], fval)
        X_unit.append((point - native_lo) / span)
        rewards.append(-fval)

    acq_rng, fit_seed_rng, restart_rng = _seed_streams(spec.seed)
    fail_tol = spec.turbo.fail_tol if spec.turbo.fail_tol is not None else d
    best_idx = int(np.argmax(rewards))
    tr = TrustRegionState(X_unit[best_idx], spec.turbo, fail_tol)
    region_best = rewards[best_idx]
    restart_pending = False
    warm = None
    for it in range(spec.budget - len(init)):
        beta = spec.schedule.beta(it)
        if restart_pending:
            x_unit = restart_rng.uniform(0.0, 1.0, size=d)
        else:
            inside = [
                j for j, x in enumerate(X_unit)
                if np.all(np.abs(x - tr.center) <= tr.length / 2.0)
            ]
            if len(inside) < 2:
                dist = [float(np.max(np.abs(x - tr.center))) for x in X_unit]
                inside = list(np.argsort(dist, kind="stable")[:2])
            Xl = np.asarray([X_unit[j] for j in inside])
            yl = np.asarray([rewards[j] for j in inside])
            try:
                surr = fit(Xl, yl, _fit_config(spec, it, fit_seed_rng, warm))
            except NumericalFailure:
                trace.status = STATUS_FAILED
                return trace
            warm = surr.params
            ls = surr.params.lengthscales
            weights = ls / np.exp(np.mean(np.log(ls)))
            half = 0.5 * tr.length * weights
            box_lo = np.clip(tr.center - half, 0.0, 1.0)
            box_hi = np.clip(tr.center + half, 0.0, 1.0)

            def acq(batch):
                mean, var = surr.predict(batch)
                return ucb(mean, var, beta)

            x_unit = maximize_acquisition(acq, box_lo, box_hi, acq_rng,
                                          budget=spec.acq_budget, seeds=tr.center)
        native = np.clip(native_lo + x_unit * span, native_lo, native_hi)
        e, i = sim.evaluate(native)
        fval = obj(e, i)
        trace.append(native, e, i, fval, beta=beta)
        X_unit.append((native - native_lo) / span)
        rewards.append(-fval)

        if restart_pending:
            tr.reset(X_unit[-1])
            region_best = rewards[-1]
            restart_pending = False
            continue
        improved = rewards[-1] > region_best + spec.turbo.improvement_rtol * abs(region_best)
        if improved:
            region_best = rewards[-1]
            tr.center = X_unit[-1]
        if tr.update(improved) == "restart":
            restart_pending = True
    trace.clamp_events = obj.clamp_events
    return trace


def _ehvi_reference(y1: np.ndarray, y2: np.ndarray) -> tuple[float, float]:
    """Adaptive nadir: observed per-objective maximum plus 10% of the range."""
    def pad(v):
        span = float(np.max(v) - np.min(v))
        if span > 0:
            return 0.1 * span
        return max(1e-6, 1e-6 * abs(float(np.max(v))))

    return float(np.max(y1)) + pad(y1), float(np.max(y2)) + pad(y2)


def _run_mobo(spec: OptimizerSpec, sim_cfg: SimulatorConfig,
              bounds: NormalizationBounds, init: InitSample,
              trial_id: int = 0) -> TrialTrace:
    """Bi-objective loop minimizing (E, -I) with exact EHVI proposals."""
    trace = TrialTrace(spec.kind, trial_id=trial_id, seed=spec.seed, dim=sim_cfg.dim)
    sim = Simulator(sim_cfg, start_clock=len(init))
    obj = ScalarizedObjective(bounds)
    native_lo, native_hi = sim_cfg.box
    span = native_hi - native_lo
    d = sim_cfg.dim

    X_unit: list[np.ndarray] = []
    y_e: list[float] = []
    y_ni: list[float] = []
    front = ParetoFront()
    for j in range(len(init)):
        point = init.points[j]
        fval = obj(init.E[j], init.I[j])
        trace.append(point, init.E[j], init.I[j], fval)
        X_unit.append((point - native_lo) / span)
        y_e.append(float(init.E[j]))
        y_ni.append(float(-init.I[j]))
        front.insert((y_e[-1], y_ni[-1]))
    trace.front_history = [front.points]

    acq_rng, fit_seed_rng, _ = _seed_streams(spec.seed)
    unit_lo, unit_hi = np.zeros(d), np.ones(d)
    warm_e = warm_i = None
    for it in range(spec.budget - len(init)):
        try:
            surr_e = fit(np.asarray(X_unit), np.asarray(y_e),
                         _fit_config(spec, it, fit_seed_rng, warm_e))
            surr_i = fit(np.asarray(X_unit), np.asarray(y_ni),
                         _fit_config(spec, it, fit_seed_rng, warm_i))
        except NumericalFailure:
            trace.status = STATUS_FAILED
            return trace
        warm_e, warm_i = surr_e.params, surr_i.params
        ref = _ehvi_reference(np.asarray(y_e), np.asarray(y_ni))

        def acq(batch):
            m1, v1 = surr_e.predict(batch)
            m2, v2 = surr_i.predict(batch)
            means = np.column_stack([m1, m2])
            stds = np.sqrt(np.column_stack([v1, v2]))
            return ehvi_2d_batch(front, ref, means, stds)

        x_unit = maximize_acquisition(acq, unit_lo, unit_hi, acq_rng,
                                      budget=spec.acq_budget)
        native = np.clip(native_lo + x_unit * span, native_lo, native_hi)
        e, i = sim.evaluate(native)
        fval = obj(e, i)
        trace.append(native, e, i, fval)
        X_unit.append((native - native_lo) / span)
        y_e.append(float(e))
        y_ni.append(float(-i))
        front.insert((y_e[-1], y_ni[-1]))
        trace.front_history.append(front.points)
    trace.clamp_events = obj.clamp_events
    return trace


def run_standard_bo(spec, sim_cfg, bounds, init, trial_id: int = 0) -> TrialTrace:
    if spec.kind != "standard_bo":
        raise ConfigError(f"expected kind standard_bo, got {spec.kind}")
    return _run_scalarized(spec, sim_cfg, bounds, init, trial_id)


def run_domain_guided(spec, sim_cfg, bounds, init, trial_id: int = 0) -> TrialTrace:
    if spec.kind != "domain_guided":
        raise ConfigError(f"expected kind domain_guided, got {spec.kind}")
    return _run_scalarized(spec, sim_cfg, bounds, init, trial_id)


def run_turbo(spec, sim_cfg, bounds, init, trial_id: int = 0) -> TrialTrace:
    if spec.kind != "turbo":
        raise ConfigError(f"expected kind turbo, got {spec.kind}")
    return _run_turbo(spec, sim_cfg, bounds, init, trial_id)


def run_mobo(spec, sim_cfg, bounds, init, trial_id: int = 0) -> TrialTrace:
    if spec.kind != "mobo":
        raise ConfigError(f"expected kind mobo, got {spec.kind}")
    return _run_mobo(spec, sim_cfg, bounds, init, trial_id)


def run_ablation_variant(spec, sim_cfg, bounds, init, trial_id: int = 0) -> TrialTrace:
    if spec.kind not in ("transform_only", "annealing_only"):
        raise ConfigError(f"expected an ablation kind, got {spec.kind}")
    return _run_scalarized(spec, sim_cfg, bounds, init, trial_id)


_RUNNERS = {
    "standard_bo": run_standard_bo,
    "domain_guided": run_domain_guided,
    "turbo": run_turbo,
    "mobo": run_mobo,
    "transform_only": run_ablation_variant,
    "annealing_only": run_ablation_variant,
}


def run_trial(spec: OptimizerSpec, sim_cfg: SimulatorConfig,
              bounds: NormalizationBounds, init: InitSample,
              trial_id: int = 0) -> TrialTrace:
    """Dispatch to the variant's loop; the trace label is the spec kind."""
    return _RUNNERS[spec.kind](spec, sim_cfg, bounds, init, trial_id)
