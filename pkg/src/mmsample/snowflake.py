"""Measure-driven quasimetrics, snowflakes and their chain metrics."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.sparse.csgraph import shortest_path
from scipy.spatial.distance import cdist

from .errors import DomainError, ValidationError
from .space import FiniteMetricMeasureSpace

__all__ = [
    "VARIANTS",
    "QuasimetricMatrix",
    "ChainMetricResult",
    "quasimetric_q",
    "quasimetric_pairs",
    "quasimetric_constant",
    "chain_metric",
    "empirical_quasisymmetry",
    "remark_exponent_bound",
]

VARIANTS = ("general", "euclidean_midpoint", "plain_snowflake")


@dataclass(frozen=True, eq=False)
class QuasimetricMatrix:
    values: np.ndarray
    s: float
    variant: str

    @cached_property
    def quasi_constant_K(self) -> float:
        return quasimetric_constant(self.values)

    @property
    def K(self) -> float:
        return self.quasi_constant_K

    def sidecar(self) -> dict:
        return {"s": self.s, "K": self.quasi_constant_K, "variant": self.variant}


@dataclass(frozen=True, eq=False)
class ChainMetricResult:
    metric: np.ndarray
    max_ratio: float
    min_ratio: float

    @property
    def bilipschitz_C(self) -> float:
        return self.max_ratio


def _check_variant(space, s, variant):
    if not s > 0:
        raise DomainError(f"snowflake exponent s must be positive, got {s}")
    if variant not in VARIANTS:
        raise DomainError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if variant == "euclidean_midpoint" and space.coords is None:
        raise DomainError("euclidean_midpoint variant needs a space built from coordinates")


def _ball_masses_at_row_distances(space, rows):
    """``out[k, y] = mu(B[x_k, d(x_k, y)])`` for each ``x_k`` in ``rows``."""
    out = np.empty((len(rows), space.n))
    for k, x in enumerate(rows):
        row = space.dist[x]
        order = np.argsort(row, kind="stable")
        cm = np.cumsum(space.mass[order])
        out[k] = cm[np.searchsorted(row[order], row, side="right") - 1]
    return out


def _metric_name(p):
    if p == 2:
        return {"metric": "euclidean"}
    if p == 1:
        return {"metric": "cityblock"}
    if np.isinf(p):
        return {"metric": "chebyshev"}
    return {"metric": "minkowski", "p": p}


def _midpoint_masses(space, xs, ys):
    kw = _metric_name(space.metric_exponent or 2.0)
    c = space.coords
    mids = 0.5 * (c[xs] + c[ys])
    r = 0.5 * space.dist[xs, ys] * (1 + 1e-12)
    out = np.empty(len(xs))
    step = max(1, 2_000_000 // space.n)
    for lo in range(0, len(xs), step):
        d = cdist(mids[lo : lo + step], c, **kw)
        out[lo : lo + step] = (d <= r[lo : lo + step, None]) @ space.mass
    return out


def quasimetric_pairs(space: FiniteMetricMeasureSpace, pairs, s: float, variant: str = "general") -> np.ndarray:
    """Evaluate the quasimetric on selected ``(x, y)`` index pairs only.

    Same values as the corresponding entries of :func:`quasimetric_q`, for
    spaces too large to hold a second dense matrix.
    """
    _check_variant(space, s, variant)
    pairs = np.asarray(pairs, dtype=int).reshape(-1, 2)
    xs, ys = pairs[:, 0], pairs[:, 1]
    d = space.dist[xs, ys]
    if variant == "plain_snowflake":
        vals = d**s
    elif variant == "general":
        mass = space.mass
        vals = np.array(
            [
                mass[space.dist[x] <= r].sum() + mass[space.dist[y] <= r].sum()
                for x, y, r in zip(xs, ys, d)
            ]
        ) ** s
    else:
        vals = _midpoint_masses(space, xs, ys) ** s
    vals[xs == ys] = 0.0
    return vals


def quasimetric_q(space: FiniteMetricMeasureSpace, s: float, variant: str = "general") -> QuasimetricMatrix:
    """Quasimetric matrix of the requested variant.

    ``general``: ``(mu(B[x, d]) + mu(B[y, d]))^s`` with ``d = d(x, y)`` and
    closed balls.  ``euclidean_midpoint``: ``mu(B[m, d/2])^s`` with ``m`` the
    coordinate midpoint.  ``plain_snowflake``: ``d^s``.  The diagonal is
    set to zero in every variant; on atomic measures the general formula
    would otherwise give ``(2 mass[x])^s`` there.
    """
    _check_variant(space, s, variant)
    n = space.n
    if variant == "plain_snowflake":
        vals = space.dist**s
    elif variant == "general":
        m = _ball_masses_at_row_distances(space, range(n))
        vals = m + m.T
        del m
        np.power(vals, s, out=vals)
    else:
        iu = np.triu_indices(n, 1)
        half = _midpoint_masses(space, iu[0], iu[1]) ** s
        vals = np.zeros((n, n))
        vals[iu] = half
        vals = vals + vals.T
    np.fill_diagonal(vals, 0.0)
    return QuasimetricMatrix(vals, float(s), variant)


def _values(q):
    return q.values if isinstance(q, QuasimetricMatrix) else np.asarray(q, dtype=float)


def quasimetric_constant(values) -> float:
    """Smallest ``K >= 1`` with ``q(x, y) <= K (q(x, z) + q(z, y))`` for all triples."""
    v = _values(values)
    n = v.shape[0]
    off = ~np.eye(n, dtype=bool)
    if np.any(v[off] <= 0):
        i, j = np.argwhere((v <= 0) & off)[0]
        raise DomainError(f"quasimetric vanishes off the diagonal at pair ({i}, {j})")
    best = 1.0
    with np.errstate(invalid="ignore", divide="ignore"):
        for z in range(n):
            denom = v[:, z][:, None] + v[z, :][None, :]
            r = v / denom
            r[z, z] = 0.0
            best = max(best, float(np.nanmax(r)))
    return best


def chain_metric(q) -> ChainMetricResult:
    """Shortest-chain metric below a quasimetric.

    The metric is the all-pairs shortest-path closure of the complete
    graph weighted by ``q``; it never exceeds ``q`` and the ratios
    ``q / metric`` measure how far the sandwich is from an isometry.
    """
    v = _values(q)
    n = v.shape[0]
    if n == 1:
        return ChainMetricResult(np.zeros((1, 1)), 1.0, 1.0)
    off = ~np.eye(n, dtype=bool)
    if np.any(v[off] <= 0) or np.any(v != v.T):
        raise ValidationError("quasimetric must be symmetric and positive off the diagonal")
    metric = shortest_path(v, method="FW" if n <= 400 else "D", directed=False)
    if np.any(metric[off] <= 0):
        i, j = np.argwhere((metric <= 0) & off)[0]
        raise DomainError(f"chain collapse: metric vanishes on pair ({i}, {j})")
    ratio = v[off] / metric[off]
    return ChainMetricResult(metric, float(ratio.max()), float((1 / ratio).min()))


def remark_exponent_bound(K: float) -> float:
    """Largest ``s`` with ``(2K)^(2s) <= 2``, i.e. ``1 / (2 (log2 K + 1))``."""
    if K < 1:
        raise DomainError(f"quasimetric constant must be >= 1, got {K}")
    return 1.0 / (2.0 * (np.log2(K) + 1.0))


def _as_matrix(obj):
    if isinstance(obj, FiniteMetricMeasureSpace):
        return obj.dist
    return _values(obj)


def empirical_quasisymmetry(spaceX, spaceY, bijection=None, bins_per_decade: int = 8):
    """Tightest empirical distortion function of a bijection.

    For every triple of distinct points ``(x, a, b)`` the source ratio
    ``t = q(x, a) / q(x, b)`` is bucketed on a log grid and the largest
    image ratio ``rho(f x, f a) / rho(f x, f b)`` in each bucket is kept.
    Each returned pair is ``(t, eta)`` with ``t`` the largest source ratio
    seen in the bucket, so monotone moduli are reproduced exactly.

    ``spaceX`` and ``spaceY`` may be spaces or plain distance matrices.
    """
    dx = _as_matrix(spaceX)
    dy = _as_matrix(spaceY)
    n = dx.shape[0]
    if dy.shape[0] != n:
        raise DomainError(f"size mismatch: {n} vs {dy.shape[0]} points")
    f = np.arange(n) if bijection is None else np.asarray(bijection, dtype=int)
    if sorted(f.tolist()) != list(range(n)):
        raise DomainError("bijection must be a permutation of the point indices")
    dy = dy[np.ix_(f, f)]
    best_t: dict[int, float] = {}
    best_eta: dict[int, float] = {}
    for x in range(n):
        others = np.delete(np.arange(n), x)
        if len(others) < 2:
            continue
        sx, sy = dx[x, others], dy[x, others]
        t = sx[:, None] / sx[None, :]
        e = sy[:, None] / sy[None, :]
        mask = ~np.eye(len(others), dtype=bool)
        t, e = t[mask], e[mask]
        keys = np.floor(np.log10(t) * bins_per_decade + 1e-9).astype(int)
        for k in np.unique(keys):
            sel = keys == k
            tm, em = float(t[sel].max()), float(e[sel].max())
            if tm > best_t.get(k, -np.inf):
                best_t[k] = tm
            if em > best_eta.get(k, -np.inf):
                best_eta[k] = em
    return [(best_t[k], best_eta[k]) for k in sorted(best_t)]
