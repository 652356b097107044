"""Distances between subsets, measures and whole spaces.

Prokhorov distance is decided through Strassen's coupling characterization:
``d_P(mu, nu) <= r`` iff some coupling puts mass at most ``r`` on pairs
farther apart than ``r``.  The largest mass that can be coupled within
distance ``r`` is a bipartite max-flow, so feasibility is one flow solve.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np
from scipy.optimize import linprog

from .errors import DomainError, SizeGuardError, ValidationError
from .space import FiniteMetricMeasureSpace

__all__ = [
    "DiscreteMeasure",
    "DistanceResult",
    "measure",
    "dirac",
    "uniform",
    "hausdorff",
    "prokhorov",
    "prokhorov_bruteforce",
    "max_coupled_mass",
    "wasserstein2",
    "ghp_common",
    "gromov_hausdorff_bruteforce",
    "GH_SIZE_LIMIT",
]

GH_SIZE_LIMIT = 14


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    space_ref: str
    weights: np.ndarray
    normalized: bool = True

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights > 0)


@dataclass
class DistanceResult:
    value: float
    method: str
    tolerance: float = 0.0
    certificate: object = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {"value": self.value, "method": self.method, "tolerance": self.tolerance}


def measure(space: FiniteMetricMeasureSpace, weights, normalize: bool = True) -> DiscreteMeasure:
    w = np.asarray(weights, dtype=float)
    if w.shape != (space.n,):
        raise ValidationError(f"expected {space.n} weights, got {w.shape}")
    if np.any(w < 0) or not w.sum() > 0:
        raise ValidationError("measure weights must be nonnegative with positive sum")
    if normalize:
        w = w / w.sum()
    return DiscreteMeasure(space.ref, w, bool(normalize or abs(w.sum() - 1) <= 1e-12))


def dirac(space: FiniteMetricMeasureSpace, i: int) -> DiscreteMeasure:
    w = np.zeros(space.n)
    w[i] = 1.0
    return measure(space, w)


def uniform(space: FiniteMetricMeasureSpace, idx=None) -> DiscreteMeasure:
    w = np.zeros(space.n)
    w[np.arange(space.n) if idx is None else list(idx)] = 1.0
    return measure(space, w)


def _pair(space, mu, nu):
    for m in (mu, nu):
        if m.space_ref != space.ref or len(m.weights) != space.n:
            raise DomainError("measure does not live on this space")
        if not m.normalized or abs(m.weights.sum() - 1) > 1e-9:
            raise ValidationError("measures must be normalized probability measures")
    return mu.weights, nu.weights


def hausdorff(space: FiniteMetricMeasureSpace, A, B) -> DistanceResult:
    """Hausdorff distance between index sets ``A`` and ``B``."""
    A, B = list(A), list(B)
    if not A or not B:
        raise DomainError("Hausdorff distance needs two nonempty sets")
    sub = space.dist[np.ix_(A, B)]
    val = max(float(sub.min(axis=1).max()), float(sub.min(axis=0).max()))
    return DistanceResult(val, "exact", 0.0)


def max_coupled_mass(dist, a, b, r: float):
    """Largest total mass of a sub-coupling of ``(a, b)`` supported on ``d <= r``.

    Returns ``(mass, flow)`` with ``flow`` the sub-coupling matrix.
    """
    ia, ib = np.flatnonzero(a > 0), np.flatnonzero(b > 0)
    g = nx.DiGraph()
    for i in ia:
        g.add_edge("s", ("x", int(i)), capacity=float(a[i]))
    for j in ib:
        g.add_edge(("y", int(j)), "t", capacity=float(b[j]))
    close = dist[np.ix_(ia, ib)] <= r
    for k, l in np.argwhere(close):
        g.add_edge(("x", int(ia[k])), ("y", int(ib[l])))
    flow = np.zeros((len(a), len(b)))
    if not close.any():
        return 0.0, flow
    value, fd = nx.maximum_flow(g, "s", "t")
    for i in ia:
        for node, f in fd[("x", int(i))].items():
            if f > 0:
                flow[i, node[1]] = f
    return float(value), flow


def _strassen_feasible(dist, a, b, r):
    return max_coupled_mass(dist, a, b, r)[0] >= 1.0 - r - 1e-12


def _complete_coupling(flow, a, b):
    ra = np.clip(a - flow.sum(axis=1), 0, None)
    rb = np.clip(b - flow.sum(axis=0), 0, None)
    left = ra.sum()
    if left > 0:
        flow = flow + np.outer(ra, rb) / left
    return flow


def prokhorov(space: FiniteMetricMeasureSpace, mu: DiscreteMeasure, nu: DiscreteMeasure, tol: float | None = None) -> DistanceResult:
    """Prokhorov distance by bisection on Strassen feasibility.

    The returned value is feasible and lies within ``tol`` above the
    infimum; the certificate is a coupling of ``(mu, nu)`` putting at most
    ``value`` mass on pairs farther apart than ``value``.
    """
    a, b = _pair(space, mu, nu)
    if tol is None:
        tol = 1e-6 * max(1.0, space.diameter)
    if np.array_equal(a, b):
        return DistanceResult(0.0, "exact", tol, np.diag(a))
    lo, hi = 0.0, max(space.diameter, 1.0)
    if _strassen_feasible(space.dist, a, b, 0.0):
        lo = hi = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _strassen_feasible(space.dist, a, b, mid):
            hi = mid
        else:
            lo = mid
    # Feasibility only changes at realized distances, so inside the final
    # bracket the smallest feasible radius is max(last distance <= hi, 1 - flow).
    mass, flow = max_coupled_mass(space.dist, a, b, hi)
    d = space.dist[np.ix_(a > 0, b > 0)].ravel()
    below = d[d <= hi]
    snapped = max(float(below.max()) if len(below) else 0.0, 1.0 - mass, 0.0)
    if snapped <= hi:
        hi = snapped
    return DistanceResult(hi, "binary_search", tol, _complete_coupling(flow, a, b))


def prokhorov_bruteforce(space: FiniteMetricMeasureSpace, mu: DiscreteMeasure, nu: DiscreteMeasure, max_support: int = 10) -> float:
    """Exact Prokhorov distance by enumerating subsets of the support of ``mu``.

    ``g(t) = max_F mu(F) - nu(F^t)`` (closed ``t``-neighbourhood) is a step
    function that only changes at realized distances ``t_i``; on
    ``[t_i, t_{i+1})`` the smallest admissible ``r`` is ``max(t_i, g(t_i))``.
    """
    a, b = _pair(space, mu, nu)
    sa = np.flatnonzero(a > 0)
    if len(sa) > max_support:
        raise SizeGuardError(f"support of size {len(sa)} exceeds the oracle limit {max_support}")
    d = space.dist[sa]
    ts = np.unique(np.concatenate([[0.0], d[:, b > 0].ravel()]))
    subsets = [
        list(c) for k in range(1, len(sa) + 1) for c in itertools.combinations(range(len(sa)), k)
    ]
    best = 1.0
    for t in ts:
        if t >= best:
            break
        near = d <= t
        g = max(
            a[sa[F]].sum() - b[near[F].any(axis=0)].sum() for F in subsets
        )
        best = min(best, max(float(t), float(g)))
    return best


def wasserstein2(space: FiniteMetricMeasureSpace, mu: DiscreteMeasure, nu: DiscreteMeasure) -> DistanceResult:
    """Exact order-2 Wasserstein distance via the transportation LP."""
    a, b = _pair(space, mu, nu)
    return _w2(space.dist, a, b)


def _w2(dist, a, b):
    ia, ib = np.flatnonzero(a > 0), np.flatnonzero(b > 0)
    p, q = len(ia), len(ib)
    cost = (dist[np.ix_(ia, ib)] ** 2).ravel()
    rows = np.repeat(np.arange(p), q)
    cols = np.tile(np.arange(q), p)
    from scipy.sparse import coo_matrix, vstack

    A_r = coo_matrix((np.ones(p * q), (rows, np.arange(p * q))), shape=(p, p * q))
    A_c = coo_matrix((np.ones(p * q), (cols, np.arange(p * q))), shape=(q, p * q))
    A = vstack([A_r, A_c.tocsr()[:-1]]).tocsr()
    rhs = np.concatenate([a[ia], b[ib][:-1]])
    res = linprog(cost, A_eq=A, b_eq=rhs, bounds=(0, None), method="highs")
    if res.status != 0:
        raise DomainError(f"transport LP failed: {res.message}")
    plan = np.zeros((len(a), len(b)))
    plan[np.ix_(ia, ib)] = np.clip(res.x.reshape(p, q), 0, None)
    return DistanceResult(math.sqrt(max(float(res.fun), 0.0)), "exact", 0.0, plan)


def ghp_common(space: FiniteMetricMeasureSpace, mu: DiscreteMeasure, nu: DiscreteMeasure, tol: float | None = None) -> DistanceResult:
    """Hausdorff distance of supports plus Prokhorov distance, in one common space.

    This is the quantity minimized in the Gromov-Hausdorff-Prokhorov
    distance, evaluated for the given embedding, hence an upper bound.
    """
    _pair(space, mu, nu)
    h = hausdorff(space, mu.support, nu.support).value
    p = prokhorov(space, mu, nu, tol)
    return DistanceResult(h + p.value, "upper_bound", p.tolerance, p.certificate)


def _matrix(obj):
    if isinstance(obj, FiniteMetricMeasureSpace):
        return obj.dist
    return np.asarray(obj, dtype=float)


def gromov_hausdorff_bruteforce(X, Y, limit: int = GH_SIZE_LIMIT) -> DistanceResult:
    """Exact Gromov-Hausdorff distance of two tiny metric spaces.

    Minimizes the distortion over correspondences by branch and bound.
    Only correspondences of the form ``graph(f) + {(g(y), y) : y not in
    f(X)}`` need to be searched: every correspondence contains one, and
    removing pairs never increases distortion.  The certificate is the
    optimal list of ``(x, y)`` pairs.
    """
    dx, dy = _matrix(X), _matrix(Y)
    n, m = len(dx), len(dy)
    if n + m > limit:
        raise SizeGuardError(f"|X| + |Y| = {n + m} exceeds the enumeration limit {limit}")
    if n == 0 or m == 0:
        raise DomainError("spaces must be nonempty")

    best_pairs = [(i, j) for i in range(n) for j in range(m)]
    best = max(abs(dx[i, k] - dy[j, l]) for i, j in best_pairs for k, l in best_pairs)
    pairs: list = []

    def added_cost(i, j):
        return max((abs(dx[i, k] - dy[j, l]) for k, l in pairs), default=0.0)

    def search(pos, cur, covered):
        nonlocal best, best_pairs
        if cur >= best:
            return
        if pos < n:
            i = pos
            cands = sorted((max(cur, added_cost(i, j)), j) for j in range(m))
            for c, j in cands:
                if c >= best:
                    break
                pairs.append((i, j))
                search(pos + 1, c, covered | {j})
                pairs.pop()
            return
        rest = [j for j in range(m) if j not in covered]
        if not rest:
            best, best_pairs = cur, list(pairs)
            return
        j = rest[0]
        cands = sorted((max(cur, added_cost(i, j)), i) for i in range(n))
        for c, i in cands:
            if c >= best:
                break
            pairs.append((i, j))
            search(pos, c, covered | {j})
            pairs.pop()

    search(0, 0.0, frozenset())
    return DistanceResult(0.5 * float(best), "brute_force", 0.0, sorted(best_pairs))
