"""Synthetic split-and-delay alignment testbed.

Closed-form objectives reproduce the geometry that makes the real
instrument hard to tune: the beam position error forms 45-degree canyons
coupling each knob pair, while the intensity is a product of sharp
flat-top acceptance gates, so the reward is a needle in a haystack whose
peak sits exactly on the zero-error manifold.  An optional drift model
adds the slow linear walk plus Gaussian jitter observed on the hardware.
"""

from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidBounds, InvalidInput
from .transform import KnobPair

_LN2 = float(np.log(2.0))
_INV_SQRT2 = 1.0 / np.sqrt(2.0)

DEFAULT_PAIRS = tuple(KnobPair(2 * i, 2 * i + 1) for i in range(6))

# Even-integer components so landscape grids with even spacing sample the
# optimum exactly; strictly inside the default +/-100 urad box.
DEFAULT_THETA_STAR = (
    22.0, -14.0, 8.0, 30.0, -28.0, 12.0, -6.0, 18.0, -20.0, 4.0, 26.0, -10.0
)


@dataclass(frozen=True)
class DriftModel:
    """Linear drift plus Gaussian jitter on the position-error readback.

    ``rate_um_per_eval`` is the drift accumulated between successive
    evaluations; at the observed 0.3 um/min hardware rate this is
    0.3 * (seconds_per_eval / 60).  Jitter is resampled per evaluation
    from a counter-keyed stream, so measurement t is reproducible in
    isolation and identical across simulator instances sharing a seed.
    """

    rate_um_per_eval: float = 0.05
    jitter_rms_um: float = 0.108
    seed: int = 0

    def __post_init__(self):
        if self.jitter_rms_um < 0:
            raise InvalidInput(f"jitter_rms_um must be >= 0, got {self.jitter_rms_um}")

    @staticmethod
    def from_cadence(seconds_per_eval: float, rate_um_per_min: float = 0.3,
                     jitter_rms_um: float = 0.108, seed: int = 0) -> "DriftModel":
        return DriftModel(
            rate_um_per_eval=rate_um_per_min * seconds_per_eval / 60.0,
            jitter_rms_um=jitter_rms_um,
            seed=seed,
        )

    def sample(self, t: int) -> float:
        """Noise contribution at evaluation index t (drift + jitter)."""
        jitter = 0.0
        if self.jitter_rms_um > 0:
            rng = np.random.default_rng(np.random.SeedSequence([self.seed, int(t)]))
            jitter = self.jitter_rms_um * rng.standard_normal()
        return self.rate_um_per_eval * t + jitter


@dataclass(frozen=True)
class SimulatorConfig:
    """Geometry and noise settings of the synthetic testbed.

    Position error couples the two knobs of every pair through their
    differential mode (gain ``diff_weights``, um per urad) and, weakly or
    not at all, their common mode (``common_weights``).  Intensity is
    gated on ``gated_axes``: each gate is a flat-top profile of half-max
    half-width ``darwin_widths`` around ``theta_star``.
    """

    dim: int = 12
    pairs: tuple[KnobPair, ...] = DEFAULT_PAIRS
    lower: tuple[float, ...] = (-100.0,) * 12
    upper: tuple[float, ...] = (100.0,) * 12
    theta_star: tuple[float, ...] = DEFAULT_THETA_STAR
    gated_axes: tuple[int, ...] = (0, 1)
    darwin_widths: tuple[float, ...] = (3.0, 3.0)
    gate_order: int = 8
    diff_weights: tuple[float, ...] = (1.0,) * 6
    common_weights: tuple[float, ...] = (0.0,) * 6
    peak_intensity: float = 1.0
    bpe_target: float = 5.0
    noise: DriftModel | None = None

    def __post_init__(self):
        lower = np.asarray(self.lower, float)
        upper = np.asarray(self.upper, float)
        theta = np.asarray(self.theta_star, float)
        if lower.shape != (self.dim,) or upper.shape != (self.dim,) or theta.shape != (self.dim,):
            raise InvalidBounds(
                f"lower/upper/theta_star must all have length dim={self.dim}"
            )
        if np.any(lower >= upper):
            raise InvalidBounds("box bounds degenerate: lower >= upper on some axis")
        if np.any(theta <= lower) or np.any(theta >= upper):
            raise InvalidBounds("theta_star must lie strictly inside the box")
        if len(self.darwin_widths) != len(self.gated_axes):
            raise InvalidBounds("need one darwin width per gated axis")
        if any(w <= 0 for w in self.darwin_widths):
            raise InvalidInput("darwin widths must be positive")
        if len(self.diff_weights) != len(self.pairs) or len(self.common_weights) != len(self.pairs):
            raise InvalidBounds("need one diff/common weight per pair")
        if any(w <= 0 for w in self.diff_weights):
            raise InvalidInput("diff weights must be positive")
        if any(w < 0 for w in self.common_weights):
            raise InvalidInput("common weights must be >= 0")
        if any(not 0 <= a < self.dim for a in self.gated_axes):
            raise InvalidBounds("gated axis outside [0, dim)")
        if self.gate_order < 2 or self.gate_order % 2:
            raise InvalidInput("gate order must be an even integer >= 2")

    @property
    def box(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.lower, float), np.asarray(self.upper, float)


def _clip_to_box(cfg: SimulatorConfig, k: np.ndarray) -> np.ndarray:
    lower, upper = cfg.box
    if np.any(k < lower) or np.any(k > upper):
        warnings.warn("evaluation point outside the box was clamped", stacklevel=3)
        return np.clip(k, lower, upper)
    return k


def pair_modes(cfg: SimulatorConfig, k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-pair (differential, common) deviations of k from theta_star."""
    delta = np.asarray(k, float) - np.asarray(cfg.theta_star, float)
    d = np.empty(len(cfg.pairs))
    c = np.empty(len(cfg.pairs))
    for i, p in enumerate(cfg.pairs):
        d[i] = (delta[p.delay_index] - delta[p.ref_index]) * _INV_SQRT2
        c[i] = (delta[p.delay_index] + delta[p.ref_index]) * _INV_SQRT2
    return d, c


def beam_position_error(cfg: SimulatorConfig, k: np.ndarray, t: int = 0) -> float:
    """Position mismatch (um) between the two branches at evaluation t.

    Noiseless value is the norm of the weighted differential/common mode
    deviations, zero exactly at theta_star.  With a configured drift model
    the linear drift and jitter at index t are added to the readback, so
    the returned value can be slightly negative near the optimum.
    """
    k = _clip_to_box(cfg, np.asarray(k, float))
    d, c = pair_modes(cfg, k)
    sq = np.sum((np.asarray(cfg.diff_weights) * d) ** 2)
    sq += np.sum((np.asarray(cfg.common_weights) * c) ** 2)
    e = float(np.sqrt(sq))
    if cfg.noise is not None:
        e += cfg.noise.sample(t)
    return e


def gate_profile(u: np.ndarray, order: int = 8) -> np.ndarray:
    """Flat-top acceptance: exp(-|u|^order * ln 2), half-max at |u| = 1."""
    return np.exp(-_LN2 * np.abs(u) ** order)


def intensity(cfg: SimulatorConfig, k: np.ndarray) -> float:
    """Throughput (a.u.): product of the per-axis acceptance gates."""
    k = _clip_to_box(cfg, np.asarray(k, float))
    theta = np.asarray(cfg.theta_star, float)
    axes = np.asarray(cfg.gated_axes, int)
    if axes.size == 0:
        return float(cfg.peak_intensity)
    u = (k[axes] - theta[axes]) / np.asarray(cfg.darwin_widths, float)
    return float(cfg.peak_intensity * np.prod(gate_profile(u, cfg.gate_order)))


def max_error_over_box(cfg: SimulatorConfig) -> float:
    """Maximum noiseless position error over the box.

    E^2 is separable per pair, so the maximum is the sum of per-pair
    maxima over each pair's four box corners (E is convex in k).
    """
    lower, upper = cfg.box
    theta = np.asarray(cfg.theta_star, float)
    total = 0.0
    for i, p in enumerate(cfg.pairs):
        best = 0.0
        for kd in (lower[p.delay_index], upper[p.delay_index]):
            for kr in (lower[p.ref_index], upper[p.ref_index]):
                dd = (kd - theta[p.delay_index]) - (kr - theta[p.ref_index])
                cc = (kd - theta[p.delay_index]) + (kr - theta[p.ref_index])
                val = (cfg.diff_weights[i] * dd * _INV_SQRT2) ** 2
                val += (cfg.common_weights[i] * cc * _INV_SQRT2) ** 2
                best = max(best, val)
        total += best
    return float(np.sqrt(total))


class Simulator:
    """Stateful wrapper advancing one drift clock across evaluations.

    One instance per trial; instances sharing a config and noise seed see
    identical noise at identical clock values, which keeps shared initial
    samples byte-identical across algorithms.
    """

    def __init__(self, cfg: SimulatorConfig, start_clock: int = 0):
        self.cfg = cfg
        self.clock = start_clock

    def evaluate(self, k: np.ndarray) -> tuple[float, float]:
        """Measure (E um, I a.u.) at the current clock, then advance it."""
        e = beam_position_error(self.cfg, k, self.clock)
        i = intensity(self.cfg, k)
        self.clock += 1
        return e, i


def landscape_slice(
    cfg: SimulatorConfig,
    axis_a: int,
    axis_b: int,
    grid: int,
    fixed: np.ndarray | None = None,
) -> np.ndarray:
    """Noiseless (E, I) over a regular 2-D grid; rows are (a, b, E, I).

    Remaining coordinates sit at ``fixed`` (default: theta_star).  The
    grid spans each axis's box range inclusively; output is row-major in
    axis_a then axis_b, one row per node.
    """
    if axis_a == axis_b:
        raise InvalidInput("slice axes must differ")
    for ax in (axis_a, axis_b):
        if not 0 <= ax < cfg.dim:
            raise InvalidInput(f"slice axis {ax} outside [0, {cfg.dim})")
    if grid < 2:
        raise InvalidInput(f"grid must be at least 2, got {grid}")
    base = np.asarray(cfg.theta_star if fixed is None else fixed, float).copy()
    if base.shape != (cfg.dim,):
        raise InvalidBounds(f"fixed coordinates must have length {cfg.dim}")
    lower, upper = cfg.box
    a_vals = np.linspace(lower[axis_a], upper[axis_a], grid)
    b_vals = np.linspace(lower[axis_b], upper[axis_b], grid)
    noiseless = dataclasses.replace(cfg, noise=None)
    rows = np.empty((grid * grid, 4))
    r = 0
    for a in a_vals:
        base[axis_a] = a
        for b in b_vals:
            base[axis_b] = b
            rows[r, 0] = a
            rows[r, 1] = b
            rows[r, 2] = beam_position_error(noiseless, base)
            rows[r, 3] = intensity(noiseless, base)
            r += 1
    return rows
