"""Low-distortion Euclidean embeddings of finite (snowflaked) metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.spatial.distance import pdist

from .errors import DomainError
from .space import FiniteMetricMeasureSpace

__all__ = [
    "EmbeddingResult",
    "EmbeddingBudget",
    "distortion",
    "surrogate_loss",
    "embed_metric",
    "embed_snowflake",
    "naor_naiman_budget",
]


@dataclass(frozen=True, eq=False)
class EmbeddingResult:
    coords: np.ndarray
    N: int
    distortion_L: float
    scale: float
    iterations: int
    converged: bool
    restart: int = 0

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "distortion_L": self.distortion_L,
            "scale": self.scale,
            "iterations": self.iterations,
            "converged": self.converged,
            "restart": self.restart,
        }


@dataclass(frozen=True)
class EmbeddingBudget:
    N_bound: float
    L_bound: float
    a: float
    b: float
    doubling_D: float
    epsilon: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _target(obj):
    if isinstance(obj, FiniteMetricMeasureSpace):
        return obj.dist
    if hasattr(obj, "values"):
        return np.asarray(obj.values, dtype=float)
    return np.asarray(obj, dtype=float)


def _condensed(m):
    iu = np.triu_indices(len(m), 1)
    return m[iu]


def distortion(target, coords):
    """Bilipschitz distortion ``(L, scale)`` of a configuration.

    With ``r_xy = |f(x) - f(y)| / target(x, y)``, ``L = max r / min r`` and
    ``scale = 1 / sqrt(max r min r)``, the uniform rescaling that balances
    expansion and contraction.  ``L`` is infinite if two distinct points
    share an image.
    """
    t = _condensed(_target(target))
    x = np.asarray(coords, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if len(x) != len(_target(target)):
        raise DomainError("coordinate count does not match the number of points")
    if len(t) == 0:
        return 1.0, 1.0
    r = pdist(x) / t
    lo, hi = float(r.min()), float(r.max())
    if lo <= 0:
        return math.inf, math.inf
    return hi / lo, 1.0 / math.sqrt(hi * lo)


def surrogate_loss(flat, target_condensed, n, dim):
    """Sum of squared log-ratios and its gradient with respect to the coordinates."""
    x = flat.reshape(n, dim)
    iu, ju = np.triu_indices(n, 1)
    diff = x[iu] - x[ju]
    sq = np.einsum("ij,ij->i", diff, diff)
    sq = np.maximum(sq, 1e-300)
    lr = 0.5 * np.log(sq) - np.log(target_condensed)
    loss = float(np.sum(lr**2))
    coef = (2 * lr / sq)[:, None] * diff
    grad = np.zeros_like(x)
    np.add.at(grad, iu, coef)
    np.add.at(grad, ju, -coef)
    return loss, grad.ravel()


def _classical_mds(target, dim):
    n = len(target)
    j = np.eye(n) - 1.0 / n
    b = -0.5 * j @ (target**2) @ j
    w, v = np.linalg.eigh(b)
    idx = np.argsort(w)[::-1][:dim]
    x = v[:, idx] * np.sqrt(np.clip(w[idx], 0, None))
    if x.shape[1] < dim:
        x = np.hstack([x, np.zeros((n, dim - x.shape[1]))])
    return x


def embed_metric(target, N: int, seed: int = 0, max_iters: int = 2000, restarts: int = 5, tol: float = 1e-8) -> EmbeddingResult:
    """Search for a low-distortion map of a finite metric into R^N.

    Restart 0 starts from classical multidimensional scaling, the others
    from seeded Gaussian configurations scaled to the target.  Each run
    minimizes :func:`surrogate_loss` with L-BFGS; the configuration with
    the smallest exact distortion wins (ties to the earlier restart).
    """
    t = _target(target)
    n = len(t)
    if n < 2:
        raise DomainError("embedding needs at least two points")
    if N < 1:
        raise DomainError(f"target dimension must be >= 1, got {N}")
    tc = _condensed(t)
    if np.any(tc <= 0):
        raise DomainError("target distances must be positive off the diagonal")
    rng = np.random.default_rng(seed)
    starts = [_classical_mds(t, N)]
    for _ in range(max(restarts, 1) - 1):
        starts.append(rng.standard_normal((n, N)) * float(np.mean(tc)))
    best = None
    for k, x0 in enumerate(starts):
        x0 = x0 + 1e-6 * float(np.mean(tc)) * rng.standard_normal(x0.shape)
        res = minimize(
            surrogate_loss,
            x0.ravel(),
            args=(tc, n, N),
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": max_iters, "gtol": tol, "ftol": 1e-15},
        )
        coords = res.x.reshape(n, N)
        L, scale = distortion(t, coords)
        gnorm = float(np.linalg.norm(res.jac))
        out = EmbeddingResult(coords, N, L, scale, int(res.nit), bool(gnorm < tol or res.nit >= max_iters), k)
        if best is None or out.distortion_L < best.distortion_L:
            best = out
    return best


def embed_snowflake(space: FiniteMetricMeasureSpace, snowflake_eps: float, N: int, seed: int = 0, max_iters: int = 2000, restarts: int = 5) -> EmbeddingResult:
    """Embed the snowflake ``d^snowflake_eps`` of ``space`` into R^N."""
    if not 0 < snowflake_eps < 1:
        raise DomainError(f"snowflake exponent must lie in (0, 1), got {snowflake_eps}")
    if space.n < 2:
        raise DomainError("cannot embed a single point")
    return embed_metric(space.dist**snowflake_eps, N, seed, max_iters, restarts)


def naor_naiman_budget(doubling_D: float, epsilon: float, a: float = 1.0, b: float = 1.0) -> EmbeddingBudget:
    """Dimension and distortion budgets ``a log D`` and ``b (log D / epsilon)^2``.

    Natural logarithms; ``a`` and ``b`` are unspecified absolute constants.
    """
    if not doubling_D > 1:
        raise DomainError(f"doubling constant must exceed 1, got {doubling_D}")
    if not 0 < epsilon < 0.5:
        raise DomainError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    logd = math.log(doubling_D)
    return EmbeddingBudget(a * logd, b * (logd / epsilon) ** 2, a, b, doubling_D, epsilon)
