"""Minimal epsilon-nets, intersection patterns and covering order."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError
from .space import FiniteMetricMeasureSpace

__all__ = [
    "Net",
    "IntersectionPattern",
    "farthest_point_order",
    "minimal_epsilon_net",
    "intersection_pattern",
    "covering_order",
    "membership",
    "covering_radius",
    "net_equivalence_check",
    "NetEquivalenceReport",
]


@dataclass(frozen=True)
class Net:
    """A minimal epsilon-net: closed epsilon-balls around ``centers`` cover
    the space and the centers are pairwise more than epsilon apart.

    ``separation`` is ``inf`` for a single-center net.
    """

    space_ref: str
    n_points: int
    epsilon: float
    centers: tuple
    covering_radius: float
    separation: float

    def __len__(self):
        return len(self.centers)

    def to_dict(self, space: FiniteMetricMeasureSpace | None = None) -> dict:
        ids = list(self.centers) if space is None else [space.ids[c] for c in self.centers]
        return {
            "epsilon": self.epsilon,
            "centers": ids,
            "covering_radius": self.covering_radius,
            "separation": None if math.isinf(self.separation) else self.separation,
        }

    @classmethod
    def from_dict(cls, d: dict, space: FiniteMetricMeasureSpace) -> "Net":
        centers = tuple(space.index_of(c) for c in d["centers"])
        sep = d.get("separation")
        return cls(
            space.ref,
            space.n,
            float(d["epsilon"]),
            centers,
            float(d["covering_radius"]),
            math.inf if sep is None else float(sep),
        )


@dataclass(frozen=True)
class IntersectionPattern:
    """Edges ``(k, l)``, ``k < l``, are positions into ``Net.centers``."""

    edges: frozenset

    def __contains__(self, pair):
        k, l = pair
        return (min(k, l), max(k, l)) in self.edges

    def __len__(self):
        return len(self.edges)


def _check(space, net):
    if net.n_points != space.n or net.space_ref != space.ref:
        raise DomainError("net was not built over this space")


def _pairwise_min(dist, idx):
    if len(idx) < 2:
        return math.inf
    sub = dist[np.ix_(idx, idx)]
    return float(sub[np.triu_indices(len(idx), 1)].min())


def farthest_point_order(dist, seed: int = 0, stop: float = -math.inf):
    """Greedy farthest-point traversal.

    Returns ``(order, radii)`` where ``radii[i]`` is the distance of the
    ``i``-th added point to the previously chosen set (``inf`` for the seed).
    The traversal stops once the farthest remaining distance is ``<= stop``.
    Ties go to the lowest index (``argmax`` returns the first maximum).
    """
    n = dist.shape[0]
    order = [int(seed)]
    radii = [math.inf]
    nearest = dist[seed].copy()
    while len(order) < n:
        far = int(np.argmax(nearest))
        r = float(nearest[far])
        if r <= stop:
            break
        order.append(far)
        radii.append(r)
        np.minimum(nearest, dist[far], out=nearest)
    return order, radii


def minimal_epsilon_net(space: FiniteMetricMeasureSpace, epsilon: float, seed_index: int = 0) -> Net:
    """Greedy farthest-point epsilon-net started from ``seed_index``.

    Points are added while the farthest point lies more than ``epsilon``
    from the chosen set, so on exit the covering radius is ``<= epsilon``
    and every pair of centers is more than ``epsilon`` apart.
    """
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    if not 0 <= seed_index < space.n:
        raise DomainError(f"seed index {seed_index} out of range for {space.n} points")
    order, _ = farthest_point_order(space.dist, seed_index, stop=epsilon)
    cov = float(space.dist[order].min(axis=0).max())
    return Net(
        space.ref,
        space.n,
        float(epsilon),
        tuple(order),
        cov,
        _pairwise_min(space.dist, order),
    )


def membership(space: FiniteMetricMeasureSpace, net: Net) -> np.ndarray:
    """Boolean matrix ``(n_points, n_centers)``: point lies in the closed ball."""
    _check(space, net)
    return space.dist[:, list(net.centers)] <= net.epsilon


def covering_radius(dist, centers) -> float:
    return float(np.asarray(dist)[list(centers)].min(axis=0).max())


def intersection_pattern(space: FiniteMetricMeasureSpace, net: Net) -> IntersectionPattern:
    """Pairs of centers whose closed epsilon-balls share a point of the space."""
    mem = membership(space, net).astype(float)
    shared = mem.T @ mem > 0
    k, l = np.nonzero(np.triu(shared, 1))
    return IntersectionPattern(frozenset(zip(k.tolist(), l.tolist())))


def covering_order(space: FiniteMetricMeasureSpace, net: Net) -> int:
    """Largest number of closed net balls containing a single point."""
    return int(membership(space, net).sum(axis=1).max())


@dataclass(frozen=True)
class NetEquivalenceReport:
    forward_constant: float
    backward_constant: float
    forward_budget: float
    backward_budget: float
    holds: bool
    epsilon: float
    q_epsilon: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def net_equivalence_check(
    space: FiniteMetricMeasureSpace,
    s: float,
    epsilon: float,
    ahlfors_alpha: float,
    ahlfors_C0: float,
    seed_index: int = 0,
) -> NetEquivalenceReport:
    """Test that d-nets and q_{mu,s}-nets are interchangeable at one scale.

    Forward: a d-epsilon-net must cover the space in the quasimetric at
    radius ``C* epsilon^(s alpha)`` with ``C* = 2^alpha C0^alpha``.  The
    reported ``forward_constant`` is the smallest such ``C*`` for this net.

    Backward: a q-net built at that quasimetric radius is measured in ``d``;
    ``backward_constant`` is its d-covering radius divided by epsilon.  The
    Ahlfors lower bound ``mu(B[x, R]) >= R^alpha / C0`` gives
    ``d <= C0^(1/alpha) q^(1/(s alpha))`` and hence the budget
    ``C0^(1/alpha) (C*)^(1/(s alpha))``.
    """
    from .snowflake import quasimetric_q

    if not (s > 0 and epsilon > 0 and ahlfors_alpha > 0 and ahlfors_C0 >= 1):
        raise DomainError("need s > 0, epsilon > 0, alpha > 0 and C0 >= 1")
    if not space.total_mass > 0:
        raise ValidationError("degenerate measure: zero total mass")
    a, c0 = float(ahlfors_alpha), float(ahlfors_C0)
    c_star = 2.0**a * c0**a
    q_eps = c_star * epsilon ** (s * a)
    back_budget = c0 ** (1 / a) * c_star ** (1 / (s * a))
    if space.n == 1:
        return NetEquivalenceReport(0.0, 0.0, c_star, back_budget, True, epsilon, q_eps)

    q = quasimetric_q(space, s, "general").values
    dnet = minimal_epsilon_net(space, epsilon, seed_index)
    q_cover = covering_radius(q, dnet.centers)
    forward = q_cover / epsilon ** (s * a)

    qorder, _ = farthest_point_order(q, seed_index, stop=q_eps)
    d_cover = covering_radius(space.dist, qorder)
    backward = d_cover / epsilon

    holds = forward <= c_star * (1 + 1e-12) and backward <= back_budget * (1 + 1e-12)
    return NetEquivalenceReport(forward, backward, c_star, back_budget, bool(holds), epsilon, q_eps)
