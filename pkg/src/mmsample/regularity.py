"""Doubling, Ahlfors-regularity and uniform-perfectness diagnostics.

All estimates are taken over a finite grid of probe radii; below the
resolution of the space (its smallest positive distance) every ball is a
single atom and carries no scale information, so default grids start there.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DomainError
from .nets import farthest_point_order
from .space import FiniteMetricMeasureSpace, ball_mass_profile, default_radii

__all__ = [
    "RegularityReport",
    "AhlforsFit",
    "measure_doubling_constant",
    "metric_doubling_constant",
    "ahlfors_fit",
    "ahlfors_fit_profile",
    "uniform_perfectness",
    "anti_doubling_check",
    "construct_doubling_measure",
    "regularity_report",
]


def _radii(space, radii, n_radii=16):
    if radii is None:
        return default_radii(space, n_radii)
    r = np.asarray(radii, dtype=float)
    if np.any(r < 0):
        raise DomainError("probe radii must be nonnegative")
    return r


def measure_doubling_constant(space: FiniteMetricMeasureSpace, radii=None, centers=None) -> float:
    """Largest ``mu(B[x, 2r]) / mu(B[x, r])`` over centers and probe radii."""
    r = _radii(space, radii)
    if space.n == 1 or len(r) == 0:
        return 1.0
    small = ball_mass_profile(space, r, centers)
    big = ball_mass_profile(space, 2 * r, centers)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(small > 0, big / small, np.where(big > 0, np.inf, 1.0))
    return max(1.0, float(ratio.max()))


def metric_doubling_constant(space: FiniteMetricMeasureSpace, radii=None, centers=None) -> int:
    """Greedy covering certificate for the metric doubling constant.

    For each center ``x`` and radius ``r`` the ball ``B[x, r]`` is covered by
    a greedy ``r/2``-net seeded at ``x``; the largest net size is returned.
    This bounds the optimal covering number from above.
    """
    r = _radii(space, radii)
    if space.n == 1 or len(r) == 0:
        return 1
    centers = range(space.n) if centers is None else centers
    best = 1
    for x in centers:
        row = space.dist[x]
        for rad in r:
            idx = np.flatnonzero(row <= rad)
            if len(idx) <= best:
                continue
            sub = space.dist[np.ix_(idx, idx)]
            seed = int(np.searchsorted(idx, x))
            order, _ = farthest_point_order(sub, seed, stop=rad / 2)
            best = max(best, len(order))
    return best


@dataclass(frozen=True)
class AhlforsFit:
    alpha: float
    C0: float
    residual: float

    def __iter__(self):
        return iter((self.alpha, self.C0, self.residual))


def ahlfors_fit_profile(radii, masses) -> AhlforsFit:
    """Fit ``mu(B[x, R]) ~ R^alpha`` to sampled ``(R, mass)`` pairs.

    ``alpha`` is the least-squares slope of ``log mass`` against ``log R``
    (with intercept).  ``C0 = exp(max |log mass - alpha log R|)``, so
    ``R^alpha / C0 <= mass <= C0 R^alpha`` holds on every sample;
    ``residual`` is the largest deviation from the fitted line.
    """
    R = np.asarray(radii, dtype=float).ravel()
    m = np.asarray(masses, dtype=float).ravel()
    keep = (R > 0) & (m > 0)
    R, m = R[keep], m[keep]
    lr, lm = np.log(R), np.log(m)
    if len(np.unique(lr)) < 2:
        raise DomainError("degenerate radius grid: need at least two distinct positive radii")
    if np.ptp(lm) == 0:
        raise DomainError("degenerate grid: all probed balls have equal mass")
    alpha, intercept = np.polyfit(lr, lm, 1)
    resid = lm - (alpha * lr + intercept)
    c0 = math.exp(float(np.max(np.abs(lm - alpha * lr))))
    return AhlforsFit(float(alpha), max(1.0, c0), float(np.max(np.abs(resid))))


def ahlfors_fit(space: FiniteMetricMeasureSpace, radii=None, centers=None) -> AhlforsFit:
    """Power-law fit of ball masses over all probed ``(center, radius)`` pairs."""
    r = _radii(space, radii)
    if len(r) < 2:
        raise DomainError("need at least two probe radii")
    prof = ball_mass_profile(space, r, centers)
    return ahlfors_fit_profile(np.broadcast_to(r, prof.shape), prof)


def uniform_perfectness(space: FiniteMetricMeasureSpace, centers=None) -> float:
    """Smallest ``C`` such that every realized annulus ``r/C <= d(x, .) <= r`` is nonempty.

    Radii are snapped to realized scales: ``r`` ranges over
    ``[d_1(x), diameter]`` where ``d_1(x)`` is the nearest-neighbour distance
    of ``x``.  For ``r`` in ``[d_i, d_{i+1})`` the best witness sits at
    ``d_i``, which forces ``C >= d_{i+1} / d_i``; the last scale forces
    ``C >= diameter / max_y d(x, y)``.
    """
    if space.n < 2:
        raise DomainError("uniform perfectness needs at least two points")
    centers = range(space.n) if centers is None else centers
    diam = space.diameter
    best = 1.0
    for x in centers:
        d = np.unique(space.dist[x])
        d = d[d > 0]
        if len(d) == 0:
            return math.inf
        gaps = d[1:] / d[:-1] if len(d) > 1 else np.array([1.0])
        best = max(best, float(gaps.max()), diam / float(d[-1]))
    return best


def anti_doubling_check(space: FiniteMetricMeasureSpace, a: float, radii=None, centers=None, max_k: int = 3):
    """Violations of ``mu(B[x, a^k r]) <= (1 - a)^k mu(B[x, r])``.

    Only scales ``a^k r`` at or above the resolution are probed.  Returns a
    list of ``(x, r, k, lhs, rhs)`` tuples.
    """
    if not 0 < a < 1:
        raise DomainError(f"a must lie in (0, 1), got {a}")
    r = _radii(space, radii)
    if space.n == 1 or len(r) == 0:
        return []
    centers = np.arange(space.n) if centers is None else np.asarray(centers, dtype=int)
    res = space.resolution * (1 - 1e-12)
    out = []
    base = ball_mass_profile(space, r, centers)
    for k in range(1, max_k + 1):
        rk = r * a**k
        ok = rk >= res
        if not ok.any():
            break
        shrunk = ball_mass_profile(space, rk[ok], centers)
        rhs = (1 - a) ** k * base[:, ok]
        for ci, ri in np.argwhere(shrunk > rhs * (1 + 1e-12)):
            out.append(
                (int(centers[ci]), float(r[ok][ri]), k, float(shrunk[ci, ri]), float(rhs[ci, ri]))
            )
    return out


def construct_doubling_measure(space: FiniteMetricMeasureSpace, seed_index: int = 0) -> np.ndarray:
    """Probability measure built by equal splitting down a net hierarchy.

    Level ``k`` is the greedy ``diameter * 2^-k`` net; greedy nets with a
    common seed are prefixes of one farthest-point order, so levels are
    nested.  Each new center is attached to its nearest center of the
    previous level (lowest point index on ties) and every parent's mass is
    split equally among its children, itself included.
    """
    n = space.n
    if n == 1:
        return np.ones(1)
    order, radii = farthest_point_order(space.dist, seed_index)
    radii = np.asarray(radii)
    mass = np.zeros(n)
    mass[order[0]] = 1.0
    level_size = 1
    eps = space.diameter
    while level_size < n:
        eps /= 2
        new_size = level_size + int(np.sum(radii[level_size:] > eps))
        if new_size == level_size:
            continue
        parents = np.array(sorted(order[:level_size]))
        children = order[level_size:new_size]
        d = space.dist[np.ix_(children, parents)]
        owner = parents[np.argmin(d, axis=1)]
        counts = {int(p): 1 for p in parents}
        for p in owner:
            counts[int(p)] += 1
        share = {p: mass[p] / c for p, c in counts.items()}
        for p in parents:
            mass[p] = share[int(p)]
        for c, p in zip(children, owner):
            mass[c] = share[int(p)]
        level_size = new_size
    return mass


@dataclass
class RegularityReport:
    measure_doubling_D: float
    metric_doubling_D1: int
    ahlfors_alpha: float
    ahlfors_C0: float
    ahlfors_residual: float
    uniform_perfectness_C5: float
    radii_grid: list = field(default_factory=list)
    note: str = "constants are measured on the probe grid only"

    def to_dict(self) -> dict:
        d = asdict(self)
        if math.isinf(self.uniform_perfectness_C5):
            d["uniform_perfectness_C5"] = None
            d["uniform_perfectness_infinite"] = True
        else:
            d["uniform_perfectness_infinite"] = False
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RegularityReport":
        c5 = math.inf if d.get("uniform_perfectness_infinite") else d["uniform_perfectness_C5"]
        return cls(
            d["measure_doubling_D"],
            int(d["metric_doubling_D1"]),
            d["ahlfors_alpha"],
            d["ahlfors_C0"],
            d["ahlfors_residual"],
            c5,
            list(d["radii_grid"]),
            d.get("note", ""),
        )


def regularity_report(space: FiniteMetricMeasureSpace, radii=None, centers=None, n_radii: int = 16) -> RegularityReport:
    r = _radii(space, radii, n_radii)
    if space.n == 1:
        return RegularityReport(1.0, 1, 0.0, 1.0, 0.0, 1.0, [], "single point: all constants trivial")
    try:
        fit = ahlfors_fit(space, r, centers)
    except DomainError:
        fit = AhlforsFit(0.0, 1.0, 0.0)
    return RegularityReport(
        measure_doubling_constant(space, r, centers),
        metric_doubling_constant(space, r, centers),
        fit.alpha,
        fit.C0,
        fit.residual,
        uniform_perfectness(space, centers),
        [float(x) for x in r],
    )
