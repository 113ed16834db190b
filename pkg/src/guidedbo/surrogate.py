"""Exact Gaussian-process regression with an ARD squared-exponential kernel.

Hyperparameters are chosen by multi-start quasi-Newton ascent of the log
marginal likelihood in log-parameter space; the Cholesky factor of the
training covariance is cached so prediction is a pair of triangular solves.
Targets are standardized internally, so ``params`` always refers to the
standardized-target scale while ``predict`` reports original units.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, cholesky
from scipy.linalg.lapack import dpotri, dtrtrs
from scipy.optimize import minimize

from .errors import (
    DimensionError,
    InternalError,
    InvalidData,
    InvalidInput,
    NumericalFailure,
)

_LOG_2PI = float(np.log(2.0 * np.pi))

# Diagonal jitter ladder, as a fraction of the signal variance.
_JITTER_START = 1e-10
_JITTER_MAX = 1e-4


@dataclass(frozen=True)
class KernelParams:
    """ARD kernel hyperparameters: one lengthscale per input dimension."""

    lengthscales: np.ndarray
    signal_variance: float
    noise_variance: float

    def __post_init__(self):
        ls = np.atleast_1d(np.asarray(self.lengthscales, dtype=float))
        object.__setattr__(self, "lengthscales", ls)
        if np.any(ls <= 0):
            raise InvalidInput("lengthscales must be positive")
        if self.signal_variance <= 0:
            raise InvalidInput("signal variance must be positive")
        if self.noise_variance < 0:
            raise InvalidInput("noise variance must be >= 0")

    def to_log_vector(self) -> np.ndarray:
        return np.log(
            np.concatenate(
                [self.lengthscales, [self.signal_variance, max(self.noise_variance, 1e-300)]]
            )
        )

    @staticmethod
    def from_log_vector(v: np.ndarray) -> "KernelParams":
        v = np.asarray(v, dtype=float)
        return KernelParams(
            lengthscales=np.exp(v[:-2]),
            signal_variance=float(np.exp(v[-2])),
            noise_variance=float(np.exp(v[-1])),
        )


def kernel(a: np.ndarray, b: np.ndarray, p: KernelParams) -> float:
    """ARD squared-exponential covariance between two points."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.shape != p.lengthscales.shape:
        raise DimensionError(
            f"inputs and lengthscales must share shape, got {a.shape}, {b.shape}, "
            f"{p.lengthscales.shape}"
        )
    z = (a - b) / p.lengthscales
    return float(p.signal_variance * np.exp(-0.5 * np.dot(z, z)))


def _sqdist_per_dim(X: np.ndarray) -> np.ndarray:
    """Pairwise squared differences, one (n, n) slab per input dimension."""
    diff = X[:, None, :] - X[None, :, :]
    return np.ascontiguousarray(np.moveaxis(diff**2, -1, 0))


def _kernel_matrix_from_sqdist(D2: np.ndarray, p: KernelParams) -> np.ndarray:
    s = np.tensordot(1.0 / p.lengthscales**2, D2, axes=1)
    return p.signal_variance * np.exp(-0.5 * s)


def _chol_with_jitter(K: np.ndarray, signal_variance: float):
    """Lower Cholesky factor, escalating diagonal jitter on failure.

    Returns (L, jitter_used) or (None, None) once the jitter ladder is
    exhausted; callers decide whether that is fatal.
    """
    n = K.shape[0]
    try:
        return cholesky(K, lower=True, check_finite=False), 0.0
    except np.linalg.LinAlgError:
        pass
    jitter = _JITTER_START * signal_variance
    while jitter <= _JITTER_MAX * signal_variance:
        try:
            return cholesky(K + jitter * np.eye(n), lower=True, check_finite=False), jitter
        except np.linalg.LinAlgError:
            jitter *= 10.0
    return None, None


class GpSurrogate:
    """Trained GP with cached Cholesky factorization.

    Immutable after construction; predictions are read-only and safe to
    share.  ``y_shift``/``y_scale`` map standardized targets back to the
    original scale.
    """

    def __init__(self, X, y_std, params, L, alpha, jitter, y_shift=0.0, y_scale=1.0):
        self.X = X
        self.y = y_std
        self.params = params
        self.chol = L
        self.alpha = alpha
        self.jitter = jitter
        self.y_shift = float(y_shift)
        self.y_scale = float(y_scale)
        self.fit_info: dict = {}
        self._train_scaled = self.X / self.params.lengthscales
        self._train_sq = np.sum(self._train_scaled**2, axis=1)

    @classmethod
    def build(cls, X, y, params: KernelParams, y_shift: float = 0.0,
              y_scale: float = 1.0) -> "GpSurrogate":
        """Factorize the training covariance for fixed hyperparameters.

        ``y`` is taken as already standardized under (y_shift, y_scale).
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float).ravel()
        if X.shape[0] != y.shape[0]:
            raise InvalidData(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise InvalidData("training data must be finite")
        if X.shape[1] != p_dim(params):
            raise DimensionError(
                f"X has {X.shape[1]} columns but params expect {p_dim(params)}"
            )
        D2 = _sqdist_per_dim(X)
        K = _kernel_matrix_from_sqdist(D2, params)
        K[np.diag_indices_from(K)] += params.noise_variance
        L, jitter = _chol_with_jitter(K, params.signal_variance)
        if L is None:
            raise NumericalFailure("covariance factorization failed at maximum jitter")
        alpha = cho_solve((L, True), y, check_finite=False)
        return cls(X, y, params, L, alpha, jitter, y_shift, y_scale)

    def log_marginal_likelihood(self) -> tuple[float, np.ndarray]:
        """LML of the standardized targets and its log-parameter gradient."""
        if self.chol is None or self.alpha is None:
            raise InternalError("surrogate cache is stale or missing")
        D2 = _sqdist_per_dim(self.X)
        return _lml_and_grad(D2, self.y, self.params, self.chol, self.alpha)

    def predict(self, x: np.ndarray) -> tuple[float, float] | tuple[np.ndarray, np.ndarray]:
        """Posterior mean and latent variance, de-standardized.

        Accepts a single point (d,) or a batch (m, d); variance excludes
        observation noise and reverts to the prior far from the data.
        """
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        xq = x[None, :] if single else x
        if xq.shape[1] != self.X.shape[1]:
            raise DimensionError(
                f"query dimension {xq.shape[1]} != training dimension {self.X.shape[1]}"
            )
        p = self.params
        a = xq / p.lengthscales
        sq = self._train_sq[None, :] - 2.0 * (a @ self._train_scaled.T)
        sq += np.sum(a**2, axis=1)[:, None]
        np.maximum(sq, 0.0, out=sq)
        kq = np.exp(sq * -0.5)
        kq *= p.signal_variance
        mean_std = kq @ self.alpha
        v, info = dtrtrs(self.chol, kq.T, lower=1)
        if info != 0:
            raise NumericalFailure("triangular solve failed during prediction")
        var_std = p.signal_variance - np.einsum("ij,ij->j", v, v)
        if np.any(var_std < -1e-10):
            raise NumericalFailure(
                f"negative predictive variance {float(np.min(var_std)):.3e}"
            )
        var_std = np.maximum(var_std, 0.0)
        mean = self.y_shift + self.y_scale * mean_std
        var = self.y_scale**2 * var_std
        if single:
            return float(mean[0]), float(var[0])
        return mean, var


def p_dim(p: KernelParams) -> int:
    return p.lengthscales.shape[0]


def _chol_inverse(L: np.ndarray) -> np.ndarray:
    """Inverse of K from its lower Cholesky factor (LAPACK potri)."""
    inv, info = dpotri(L, lower=1)
    if info != 0:
        return cho_solve((L, True), np.eye(L.shape[0]))
    # potri fills one triangle only
    return inv + np.tril(inv, -1).T


def _lml_and_grad(D2, y, params: KernelParams, L, alpha):
    n = y.shape[0]
    Kf = _kernel_matrix_from_sqdist(D2, params)
    lml = (
        -0.5 * float(y @ alpha)
        - float(np.sum(np.log(np.diag(L))))
        - 0.5 * n * _LOG_2PI
    )
    Kinv = _chol_inverse(L)
    W = np.outer(alpha, alpha) - Kinv
    WKf = W * Kf
    # d/dlog(l_d): Kf . D2_d / l_d^2 ; d/dlog(sv): Kf ; d/dlog(noise): noise * I
    grad_ls = 0.5 * np.einsum("dij,ij->d", D2, WKf) / params.lengthscales**2
    grad_sv = 0.5 * float(np.sum(WKf))
    grad_noise = 0.5 * params.noise_variance * float(np.trace(W))
    return lml, np.concatenate([grad_ls, [grad_sv, grad_noise]])


@dataclass
class FitConfig:
    """Hyperparameter-search settings for :func:`fit`.

    Bounds are on the raw parameters (inputs assumed box-normalized to
    [0, 1], targets standardized).  ``warm_start`` adds the previous
    optimum to the start list, which the optimization loops use to keep
    per-iteration refits cheap.
    """

    n_starts: int = 8
    seed: int | None = None
    lengthscale_bounds: tuple[float, float] = (1e-3, 1e3)
    signal_bounds: tuple[float, float] = (1e-3, 1e3)
    noise_bounds: tuple[float, float] = (1e-8, 1e-1)
    max_iter: int = 60
    warm_start: KernelParams | None = None


def _start_points(d: int, cfg: FitConfig, rng: np.random.Generator) -> list[np.ndarray]:
    starts = []
    if cfg.warm_start is not None:
        starts.append(cfg.warm_start.to_log_vector())
    else:
        starts.append(np.log(np.concatenate([np.full(d, 0.3), [1.0, 1e-4]])))
    while len(starts) < max(cfg.n_starts, 1):
        ls = np.exp(rng.uniform(np.log(0.05), np.log(2.0), size=d))
        sv = np.exp(rng.uniform(np.log(0.1), np.log(10.0)))
        nv = np.exp(rng.uniform(np.log(1e-6), np.log(1e-2)))
        starts.append(np.log(np.concatenate([ls, [sv, nv]])))
    return starts[: max(cfg.n_starts, 1)]


def fit(X: np.ndarray, y: np.ndarray, config: FitConfig | None = None) -> GpSurrogate:
    """Standardize targets and maximize the LML from multiple starts.

    Returns the surrogate at the best optimum found; ``fit_info`` records
    the chosen LML and the LML at each initialization so the multi-start
    claim is checkable.
    """
    cfg = config or FitConfig()
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] < 2:
        raise InvalidData(f"need at least 2 observations to fit, got {y.shape[0]}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise InvalidData("training data must be finite")
    n, d = X.shape

    y_shift = float(np.mean(y))
    y_scale = float(np.std(y))
    if y_scale < 1e-12:
        y_scale = 1.0
    y_std = (y - y_shift) / y_scale

    D2 = _sqdist_per_dim(X)
    lo = np.log(
        np.concatenate(
            [
                np.full(d, cfg.lengthscale_bounds[0]),
                [cfg.signal_bounds[0], cfg.noise_bounds[0]],
            ]
        )
    )
    hi = np.log(
        np.concatenate(
            [
                np.full(d, cfg.lengthscale_bounds[1]),
                [cfg.signal_bounds[1], cfg.noise_bounds[1]],
            ]
        )
    )
    bounds = list(zip(lo, hi))

    def neg_lml(logv):
        p = KernelParams.from_log_vector(np.clip(logv, lo, hi))
        K = _kernel_matrix_from_sqdist(D2, p)
        K[np.diag_indices_from(K)] += p.noise_variance
        L, _ = _chol_with_jitter(K, p.signal_variance)
        if L is None:
            return 1e25, np.zeros_like(logv)
        alpha = cho_solve((L, True), y_std, check_finite=False)
        lml, grad = _lml_and_grad(D2, y_std, p, L, alpha)
        return -lml, -grad

    rng = np.random.default_rng(cfg.seed)
    starts = [np.clip(s, lo, hi) for s in _start_points(d, cfg, rng)]
    start_lmls = [-neg_lml(s)[0] for s in starts]

    best_v, best_lml = None, -np.inf
    for s in starts:
        res = minimize(
            neg_lml, s, jac=True, method="L-BFGS-B", bounds=bounds,
            options={"maxiter": cfg.max_iter},
        )
        if -res.fun > best_lml:
            best_lml = -res.fun
            best_v = res.x
    if best_v is None:
        raise NumericalFailure("every hyperparameter start failed to factorize")

    params = KernelParams.from_log_vector(np.clip(best_v, lo, hi))
    surrogate = GpSurrogate.build(X, y_std, params, y_shift=y_shift, y_scale=y_scale)
    surrogate.fit_info = {
        "lml": float(best_lml),
        "start_lmls": [float(v) for v in start_lmls],
        "n_starts": len(starts),
    }
    return surrogate
