"""Acquisition functions and their box-constrained maximization.

Covers UCB with constant or reverse-annealed exploration weight, exact
bi-objective expected hypervolume improvement for independent Gaussian
predictions, and a deterministic candidate-sweep maximizer.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr
from scipy.stats import qmc

from .errors import InvalidInput, InvalidReferencePoint

_SQRT_2PI = float(np.sqrt(2.0 * np.pi))


@dataclass(frozen=True)
class AnnealingSchedule:
    """Exploration-weight schedule for UCB.

    ``constant`` keeps beta at beta0; ``reverse_linear`` grows it as
    beta0 + c * t so exploration pressure increases with iteration count,
    counteracting premature convergence onto broad but suboptimal basins.
    """

    kind: str = "reverse_linear"
    beta0: float = 1.0
    c: float = 0.01

    def __post_init__(self):
        if self.kind not in ("constant", "reverse_linear"):
            raise InvalidInput(f"unknown schedule kind {self.kind!r}")
        if self.beta0 < 0 or self.c < 0:
            raise InvalidInput("beta0 and c must be >= 0")

    def beta(self, t: int) -> float:
        if t < 0:
            raise InvalidInput(f"iteration index must be >= 0, got {t}")
        if self.kind == "constant":
            return self.beta0
        return self.beta0 + self.c * t


def ucb(mean, variance, beta: float):
    """mean + sqrt(beta * variance); callers maximizing a reward use it as is."""
    mean = np.asarray(mean, dtype=float)
    variance = np.asarray(variance, dtype=float)
    if np.any(variance < 0):
        raise InvalidInput("variance must be >= 0")
    if beta < 0:
        raise InvalidInput("beta must be >= 0")
    out = mean + np.sqrt(beta) * np.sqrt(variance)
    return float(out) if out.ndim == 0 else out


class ParetoFront:
    """Mutually non-dominated bi-objective points (both minimized).

    Points are kept sorted ascending in the first objective, which for a
    non-dominated set means strictly descending in the second.
    """

    def __init__(self, points=None):
        self._points: list[tuple[float, float]] = []
        if points is not None:
            for p in points:
                self.insert(p)

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(self._points)

    def __len__(self) -> int:
        return len(self._points)

    def dominates(self, y) -> bool:
        """True if some front point weakly dominates y."""
        y1, y2 = float(y[0]), float(y[1])
        return any(p1 <= y1 and p2 <= y2 for p1, p2 in self._points)

    def insert(self, y) -> bool:
        """Add y if non-dominated, pruning points it dominates."""
        y1, y2 = float(y[0]), float(y[1])
        if self.dominates((y1, y2)):
            return False
        self._points = [
            (p1, p2) for p1, p2 in self._points if not (y1 <= p1 and y2 <= p2)
        ]
        self._points.append((y1, y2))
        self._points.sort()
        return True

    def hypervolume(self, ref) -> float:
        """Area dominated by the front within the box cornered at ref."""
        r1, r2 = float(ref[0]), float(ref[1])
        hv = 0.0
        prev2 = r2
        for p1, p2 in self._points:
            width = r1 - p1
            height = prev2 - p2
            if width > 0 and height > 0:
                hv += width * height
            prev2 = min(prev2, p2)
        return hv


def _lower_partial_moment(t, mu, sigma):
    """E[(t - Y)+] for Y ~ N(mu, sigma^2); handles sigma = 0."""
    t = np.asarray(t, dtype=float)
    diff = t - mu
    if sigma == 0.0:
        return np.maximum(diff, 0.0)
    z = diff / sigma
    pdf = np.exp(-0.5 * z * z) / _SQRT_2PI
    return sigma * pdf + diff * ndtr(z)


def ehvi_2d(front: ParetoFront, ref_point, mean, stddev) -> float:
    """Exact expected hypervolume improvement for two minimized objectives.

    The candidate's objectives are independent Gaussians.  The improvement
    region decomposes into vertical strips between consecutive front
    abscissae; within strip i the already-dominated ceiling is the i-th
    front ordinate, so the expectation factorizes into a partial moment in
    each objective:

        EHVI = sum_i [psi1(b[i+1]) - psi1(b[i])] * psi2(v[i])

    with b the strip boundaries (-inf, front f1 values, ref1) and v the
    strip ceilings (ref2, then front f2 values).
    """
    r1, r2 = float(ref_point[0]), float(ref_point[1])
    mu1, mu2 = float(mean[0]), float(mean[1])
    s1, s2 = float(stddev[0]), float(stddev[1])
    if s1 < 0 or s2 < 0:
        raise InvalidInput("stddev components must be >= 0")
    pts = front.points
    for p1, p2 in pts:
        if not (p1 < r1 and p2 < r2):
            raise InvalidReferencePoint(
                f"front point ({p1}, {p2}) does not dominate ref ({r1}, {r2})"
            )

    b = np.array([p[0] for p in pts] + [r1])
    v = np.array([r2] + [p[1] for p in pts])
    psi1 = _lower_partial_moment(b, mu1, s1)
    psi1_steps = np.diff(np.concatenate([[0.0], psi1]))
    psi2 = _lower_partial_moment(v, mu2, s2)
    return float(np.sum(psi1_steps * psi2))


def ehvi_2d_batch(front: ParetoFront, ref_point, means, stddevs) -> np.ndarray:
    """Vectorized :func:`ehvi_2d` over candidate rows of means/stddevs."""
    r1, r2 = float(ref_point[0]), float(ref_point[1])
    pts = front.points
    for p1, p2 in pts:
        if not (p1 < r1 and p2 < r2):
            raise InvalidReferencePoint(
                f"front point ({p1}, {p2}) does not dominate ref ({r1}, {r2})"
            )
    means = np.asarray(means, dtype=float)
    stddevs = np.asarray(stddevs, dtype=float)
    if np.any(stddevs < 0):
        raise InvalidInput("stddev components must be >= 0")
    b = np.array([p[0] for p in pts] + [r1])
    v = np.array([r2] + [p[1] for p in pts])

    def lpm(t, mu, sigma):
        diff = t[None, :] - mu[:, None]
        out = np.maximum(diff, 0.0)
        pos = sigma > 0
        if np.any(pos):
            z = diff[pos] / sigma[pos, None]
            pdf = np.exp(-0.5 * z * z) / _SQRT_2PI
            out[pos] = sigma[pos, None] * pdf + diff[pos] * ndtr(z)
        return out

    psi1 = lpm(b, means[:, 0], stddevs[:, 0])
    psi1_steps = np.diff(np.concatenate([np.zeros((psi1.shape[0], 1)), psi1], axis=1))
    psi2 = lpm(v, means[:, 1], stddevs[:, 1])
    return np.sum(psi1_steps * psi2, axis=1)


def maximize_acquisition(
    acq,
    lower: np.ndarray,
    upper: np.ndarray,
    rng: np.random.Generator,
    budget: int = 2000,
    refine_starts: int = 3,
    sweeps: int = 3,
    seeds: np.ndarray | None = None,
) -> np.ndarray:
    """Best point from a low-discrepancy sweep plus coordinate refinement.

    ``acq`` maps an (m, d) batch to (m,) scores.  A scrambled Sobol sweep
    of ``budget`` points (optionally prepended with ``seeds``, e.g. the
    incumbent) feeds coordinate-wise refinement: ``sweeps`` passes of
    shrinking steps from the best ``refine_starts`` candidates, each pass
    cutting the step to a quarter so the final resolution is well below a
    percent of the box.  Given the same rng state the result is
    deterministic; score ties keep the first-seen point.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if budget < 1:
        raise InvalidInput(f"budget must be >= 1, got {budget}")
    if np.any(lower >= upper):
        raise InvalidInput("acquisition box is degenerate")
    d = lower.shape[0]
    seed = int(rng.integers(2**31 - 1))
    with warnings.catch_warnings():
        # Sobol balance warning for non-power-of-two budgets is expected.
        warnings.simplefilter("ignore", UserWarning)
        unit = qmc.Sobol(d, scramble=True, seed=seed).random(budget)
    cands = lower + unit * (upper - lower)
    if seeds is not None:
        seeds = np.clip(np.atleast_2d(np.asarray(seeds, float)), lower, upper)
        cands = np.vstack([seeds, cands])
    scores = np.asarray(acq(cands), dtype=float)
    order = np.argsort(-scores, kind="stable")

    best_x = cands[order[0]].copy()
    best_s = float(scores[order[0]])
    span = upper - lower
    # The refinement trajectories are independent, so all starts advance
    # together and each axis move is a single batched evaluation.
    k = min(refine_starts, len(cands))
    xs = cands[order[:k]].copy()
    ss = scores[order[:k]].astype(float).copy()
    step = 0.08 * span
    for _ in range(sweeps):
        for ax in range(d):
            trial = np.repeat(xs, 2, axis=0)
            trial[0::2, ax] = np.minimum(xs[:, ax] + step[ax], upper[ax])
            trial[1::2, ax] = np.maximum(xs[:, ax] - step[ax], lower[ax])
            ts = np.asarray(acq(trial), dtype=float)
            up, down = ts[0::2], ts[1::2]
            pick_down = down > up
            cand_s = np.where(pick_down, down, up)
            better = cand_s > ss
            if np.any(better):
                rows = np.where(better)[0]
                xs[rows] = trial[2 * rows + pick_down[rows].astype(int)]
                ss[rows] = cand_s[rows]
        step = step * 0.25
    j = int(np.argmax(ss))
    if ss[j] > best_s:
        best_x = xs[j]
    return best_x
