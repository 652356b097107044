"""Finite metric measure spaces: construction, validation and ball masses."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path
from scipy.spatial.distance import cdist

from .errors import DomainError, ValidationError

__all__ = [
    "FiniteMetricMeasureSpace",
    "ValidationReport",
    "build_from_points",
    "build_from_graph",
    "build_from_matrix",
    "validate",
    "ball_mass",
    "ball_mass_profile",
    "default_radii",
]


def _frozen(a, dtype=float):
    # already-frozen arrays are shared rather than copied (large matrices)
    if isinstance(a, np.ndarray) and a.dtype == dtype and not a.flags.writeable:
        return a
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FiniteMetricMeasureSpace:
    """A finite set of points with a full distance matrix and point masses.

    Instances are immutable; the arrays are flagged read-only.  ``coords``
    and ``metric_exponent`` are only present for spaces built from point
    clouds, where they are needed by the midpoint quasimetric.
    """

    ids: tuple
    dist: np.ndarray
    mass: np.ndarray
    coords: np.ndarray | None = None
    metric_exponent: float | None = None
    name: str | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "ids", tuple(str(i) for i in self.ids))
        object.__setattr__(self, "dist", _frozen(self.dist))
        object.__setattr__(self, "mass", _frozen(self.mass))
        if self.coords is not None:
            object.__setattr__(self, "coords", _frozen(self.coords))
        n = len(self.ids)
        if self.dist.shape != (n, n) or self.mass.shape != (n,):
            raise ValidationError("ids, dist and mass sizes disagree")
        if n == 0:
            raise ValidationError("empty space")

    def __len__(self):
        return len(self.ids)

    @property
    def n(self) -> int:
        return len(self.ids)

    @cached_property
    def diameter(self) -> float:
        return float(self.dist.max())

    @cached_property
    def total_mass(self) -> float:
        return float(self.mass.sum())

    @cached_property
    def resolution(self) -> float:
        """Smallest positive distance (0 for a single point)."""
        if self.n < 2:
            return 0.0
        best = np.inf
        step = max(1, 4_000_000 // self.n)
        for lo in range(0, self.n, step):
            block = self.dist[lo : lo + step]
            pos = block[block > 0]
            if pos.size:
                best = min(best, float(pos.min()))
        return best

    @cached_property
    def ref(self) -> str:
        """Content fingerprint used to tie derived objects to this space."""
        if self.name:
            return self.name
        h = hashlib.blake2b(digest_size=8)
        h.update(memoryview(np.ascontiguousarray(self.dist)).cast("B"))
        h.update(memoryview(np.ascontiguousarray(self.mass)).cast("B"))
        return "space-" + h.hexdigest()

    def index_of(self, ident) -> int:
        try:
            return self.ids.index(str(ident))
        except ValueError:
            raise DomainError(f"unknown point id {ident!r}") from None

    def with_mass(self, mass) -> "FiniteMetricMeasureSpace":
        """Same metric, new measure."""
        mass = np.asarray(mass, dtype=float)
        if mass.shape != self.mass.shape or np.any(mass < 0) or mass.sum() <= 0:
            raise ValidationError("masses must be nonnegative with positive sum")
        return FiniteMetricMeasureSpace(
            self.ids, self.dist, mass, self.coords, self.metric_exponent
        )

    def with_metric(self, dist) -> "FiniteMetricMeasureSpace":
        """Same points and measure, new distance matrix (no coordinates)."""
        return FiniteMetricMeasureSpace(self.ids, dist, self.mass)

    def subspace(self, idx) -> "FiniteMetricMeasureSpace":
        idx = np.asarray(idx, dtype=int)
        coords = None if self.coords is None else self.coords[idx]
        return FiniteMetricMeasureSpace(
            [self.ids[i] for i in idx],
            self.dist[np.ix_(idx, idx)],
            self.mass[idx],
            coords,
            self.metric_exponent,
        )


@dataclass
class ValidationReport:
    symmetric: bool
    triangle_violations: list = field(default_factory=list)
    zero_distance_pairs: list = field(default_factory=list)
    negative_masses: list = field(default_factory=list)
    asymmetric_pairs: list = field(default_factory=list)
    diagonal_violations: list = field(default_factory=list)
    negative_entries: list = field(default_factory=list)
    total_mass_positive: bool = True
    tol_tri: float = 0.0

    @property
    def ok(self) -> bool:
        return (
            self.symmetric
            and self.total_mass_positive
            and not self.triangle_violations
            and not self.zero_distance_pairs
            and not self.negative_masses
            and not self.diagonal_violations
            and not self.negative_entries
        )

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "symmetric": self.symmetric,
            "triangle_violations": [list(v) for v in self.triangle_violations],
            "zero_distance_pairs": [list(p) for p in self.zero_distance_pairs],
            "negative_masses": list(self.negative_masses),
            "asymmetric_pairs": [list(p) for p in self.asymmetric_pairs],
            "diagonal_violations": list(self.diagonal_violations),
            "negative_entries": [list(p) for p in self.negative_entries],
            "total_mass_positive": self.total_mass_positive,
            "tol_tri": self.tol_tri,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ValidationReport":
        return cls(
            symmetric=d["symmetric"],
            triangle_violations=[
                (int(i), int(j), int(k), float(x)) for i, j, k, x in d["triangle_violations"]
            ],
            zero_distance_pairs=[tuple(p) for p in d["zero_distance_pairs"]],
            negative_masses=list(d["negative_masses"]),
            asymmetric_pairs=[tuple(p) for p in d.get("asymmetric_pairs", [])],
            diagonal_violations=list(d.get("diagonal_violations", [])),
            negative_entries=[tuple(p) for p in d.get("negative_entries", [])],
            total_mass_positive=d.get("total_mass_positive", True),
            tol_tri=d.get("tol_tri", 0.0),
        )


def validate(dist, masses=None, tol_tri: float | None = None, max_reported: int = 1000) -> ValidationReport:
    """Check the metric measure space axioms on a raw matrix.

    Parameters
    ----------
    dist : array_like, shape (n, n)
        Candidate distance matrix.
    masses : array_like, shape (n,), optional
        Point masses, default all ones.
    tol_tri : float, optional
        Slack allowed in the triangle inequality.  Defaults to
        ``1e-9 * diameter``.
    max_reported : int
        Cap on the number of listed triangle violations.

    Returns
    -------
    ValidationReport
        Triangle violations are listed as ``(i, j, k, defect)`` with ``i < j``
        and ``defect = d[i, j] - d[i, k] - d[k, j] > tol_tri``.
    """
    d = np.asarray(dist, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValidationError(f"distance matrix must be square, got shape {d.shape}")
    n = d.shape[0]
    m = np.ones(n) if masses is None else np.asarray(masses, dtype=float)
    if m.shape != (n,):
        raise ValidationError(f"expected {n} masses, got {m.shape[0] if m.ndim else 0}")
    if tol_tri is None:
        tol_tri = 1e-9 * (float(np.nanmax(d)) if n else 0.0)

    asym = np.argwhere(np.triu(d != d.T, 1))
    rep = ValidationReport(symmetric=len(asym) == 0, tol_tri=float(tol_tri))
    rep.asymmetric_pairs = [(int(i), int(j)) for i, j in asym]
    rep.diagonal_violations = [int(i) for i in np.flatnonzero(np.diag(d) != 0)]
    rep.negative_entries = [(int(i), int(j)) for i, j in np.argwhere(d < 0)]
    off = ~np.eye(n, dtype=bool)
    rep.zero_distance_pairs = [
        (int(i), int(j)) for i, j in np.argwhere(np.triu((d == 0) & off, 1))
    ]
    rep.negative_masses = [int(i) for i in np.flatnonzero(m < 0)]
    rep.total_mass_positive = bool(m.sum() > 0)

    upper = np.triu(np.ones((n, n), dtype=bool), 1)
    viol = []
    for k in range(n):
        defect = d - (d[:, k][:, None] + d[k, :][None, :])
        bad = (defect > tol_tri) & upper
        bad[k, :] = False
        bad[:, k] = False
        for i, j in np.argwhere(bad):
            if len(viol) >= max_reported:
                break
            viol.append((int(i), int(j), int(k), float(defect[i, j])))
    viol.sort()
    rep.triangle_violations = viol
    return rep


def _check_masses(masses, n):
    if masses is None:
        return np.ones(n)
    m = np.asarray(masses, dtype=float)
    if m.shape != (n,):
        raise ValidationError(f"expected {n} masses, got {len(m)}")
    if np.any(m < 0):
        raise ValidationError(f"negative masses at indices {np.flatnonzero(m < 0).tolist()}")
    if not m.sum() > 0:
        raise ValidationError("total mass must be positive")
    return m


def build_from_points(coords, masses=None, metric_exponent: float = 2.0, ids=None) -> FiniteMetricMeasureSpace:
    """Space of points in R^d with the l_p distance, ``p = metric_exponent``."""
    try:
        x = np.array(coords, dtype=float)
    except ValueError:
        raise ValidationError("coordinate tuples have unequal dimension") from None
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValidationError("coordinates must be a nonempty list of equal-length tuples")
    p = float(metric_exponent)
    if not p >= 1:
        raise DomainError(f"metric exponent must be >= 1, got {p}")
    n = x.shape[0]
    m = _check_masses(masses, n)
    uniq, first, counts = np.unique(x, axis=0, return_index=True, return_counts=True)
    if np.any(counts > 1):
        dup = x[first[np.argmax(counts > 1)]].tolist()
        raise ValidationError(f"duplicate point {dup}")
    if p == 2:
        dist = cdist(x, x, "euclidean")
    elif p == 1:
        dist = cdist(x, x, "cityblock")
    elif np.isinf(p):
        dist = cdist(x, x, "chebyshev")
    else:
        dist = cdist(x, x, "minkowski", p=p)
    np.fill_diagonal(dist, 0.0)
    if np.count_nonzero(dist == 0) > n:
        i, j = np.argwhere((dist == 0) & ~np.eye(n, dtype=bool))[0]
        raise ValidationError(f"points {i} and {j} are distinct but their distance underflows to 0")
    dist.setflags(write=False)
    ids = [str(i) for i in range(n)] if ids is None else ids
    return FiniteMetricMeasureSpace(ids, dist, m, x, p)


def build_from_graph(vertices: Sequence, edges: Iterable) -> FiniteMetricMeasureSpace:
    """Shortest-path metric of a connected, positively weighted graph.

    ``vertices`` is a sequence of ``(id, mass)`` pairs and ``edges`` of
    ``(u, v, weight)`` triples.  Parallel edges keep the lightest weight.
    """
    ids = [str(v[0]) for v in vertices]
    if len(set(ids)) != len(ids):
        seen = set()
        dup = next(i for i in ids if i in seen or seen.add(i))
        raise ValidationError(f"duplicate vertex id {dup!r}")
    n = len(ids)
    if n == 0:
        raise ValidationError("graph has no vertices")
    m = _check_masses([float(v[1]) for v in vertices], n)
    pos = {v: i for i, v in enumerate(ids)}
    w = np.full((n, n), np.inf)
    for u, v, wt in edges:
        wt = float(wt)
        u, v = str(u), str(v)
        if u not in pos or v not in pos:
            raise ValidationError(f"edge ({u}, {v}) references an unknown vertex")
        if not wt > 0:
            raise ValidationError(f"edge ({u}, {v}) has nonpositive weight {wt}")
        if u == v:
            continue
        i, j = pos[u], pos[v]
        w[i, j] = w[j, i] = min(w[i, j], wt)
    rows, cols = np.nonzero(np.isfinite(w))
    graph = csr_matrix((w[rows, cols], (rows, cols)), shape=(n, n))
    dist = shortest_path(graph, method="D", directed=False)
    # summation order differs per source; keep the shorter of the two
    dist = np.minimum(dist, dist.T)
    if np.isinf(dist).any():
        i, j = np.argwhere(np.isinf(dist))[0]
        raise ValidationError(f"graph is disconnected: no path from {ids[i]!r} to {ids[j]!r}")
    np.fill_diagonal(dist, 0.0)
    return FiniteMetricMeasureSpace(ids, dist, m)


def build_from_matrix(dist, masses=None, ids=None, tol_tri: float | None = None) -> FiniteMetricMeasureSpace:
    """Ingest a user-supplied matrix; rejects anything ``validate`` flags."""
    rep = validate(dist, masses, tol_tri)
    if not rep.ok:
        raise ValidationError("matrix is not a valid metric measure space", rep)
    d = np.asarray(dist, dtype=float)
    n = len(d)
    m = np.ones(n) if masses is None else np.asarray(masses, dtype=float)
    ids = [str(i) for i in range(n)] if ids is None else ids
    return FiniteMetricMeasureSpace(ids, d, m)


def ball_mass(space: FiniteMetricMeasureSpace, center: int, r: float, closed: bool = True) -> float:
    """Mass of the closed (``d <= r``) or open (``d < r``) ball."""
    if not 0 <= center < space.n:
        raise DomainError(f"center index {center} out of range")
    if r < 0:
        raise DomainError(f"radius must be nonnegative, got {r}")
    row = space.dist[center]
    inside = row <= r if closed else row < r
    return float(space.mass[inside].sum())


def ball_mass_profile(space, radii, centers=None, closed: bool = True) -> np.ndarray:
    """Ball masses for every (center, radius) pair.

    Returns an array of shape ``(len(centers), len(radii))``.  One sort per
    center, so this is the fast path for grid scans.
    """
    radii = np.asarray(radii, dtype=float)
    centers = np.arange(space.n) if centers is None else np.asarray(centers, dtype=int)
    side = "right" if closed else "left"
    out = np.empty((len(centers), len(radii)))
    for row, c in enumerate(centers):
        order = np.argsort(space.dist[c], kind="stable")
        sd = space.dist[c][order]
        cm = np.concatenate([[0.0], np.cumsum(space.mass[order])])
        out[row] = cm[np.searchsorted(sd, radii, side=side)]
    return out


def default_radii(space, n_radii: int = 16, r_min: float | None = None, r_max: float | None = None) -> np.ndarray:
    """Log-spaced probe radii from the resolution up to the diameter."""
    lo = space.resolution if r_min is None else float(r_min)
    hi = space.diameter if r_max is None else float(r_max)
    if space.n < 2 or hi <= 0:
        return np.array([])
    if lo >= hi:
        return np.array([hi])
    return np.geomspace(lo, hi, n_radii)
