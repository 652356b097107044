"""Voronoi discretization of a space relative to a net, and the ball-cover nerve."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .distances import _w2
from .errors import DomainError
from .nets import Net, _check, covering_order, membership, minimal_epsilon_net
from .space import FiniteMetricMeasureSpace

__all__ = [
    "Discretization",
    "NerveComplex",
    "voronoi_discretize",
    "discretization_sequence",
    "nerve_complex",
    "covering_mesh_report",
]


@dataclass(frozen=True, eq=False)
class Discretization:
    """Voronoi cells keyed by center point index, with aggregated masses.

    ``atomic_masses[k]`` belongs to ``net.centers[k]``.
    """

    net: Net
    cells: dict
    atomic_masses: np.ndarray

    def atomic_measure(self, n_points: int) -> np.ndarray:
        """Atomic masses spread back onto a length-``n_points`` weight vector."""
        w = np.zeros(n_points)
        w[list(self.net.centers)] = self.atomic_masses
        return w

    def to_dict(self, space: FiniteMetricMeasureSpace) -> dict:
        return {
            "net": self.net.to_dict(space),
            "cells": {space.ids[c]: [space.ids[p] for p in pts] for c, pts in self.cells.items()},
            "atomic_masses": [float(x) for x in self.atomic_masses],
        }

    @classmethod
    def from_dict(cls, d: dict, space: FiniteMetricMeasureSpace) -> "Discretization":
        net = Net.from_dict(d["net"], space)
        cells = {
            space.index_of(c): [space.index_of(p) for p in pts] for c, pts in d["cells"].items()
        }
        return cls(net, cells, np.asarray(d["atomic_masses"], dtype=float))


@dataclass(frozen=True)
class NerveComplex:
    """Nerve of the closed epsilon-ball cover.

    ``vertices`` are the center point indices; simplices are sorted tuples
    of positions into ``vertices`` (so position ``k`` is ``vertices[k]``).
    ``simplices_by_dim[k]`` lists the ``k``-simplices lexicographically.
    """

    vertices: tuple
    simplices_by_dim: tuple

    @property
    def edges(self):
        return self.simplices_by_dim[1] if len(self.simplices_by_dim) > 1 else ()

    def count(self) -> int:
        return sum(len(s) for s in self.simplices_by_dim)

    def to_dict(self, space: FiniteMetricMeasureSpace | None = None) -> dict:
        verts = list(self.vertices) if space is None else [space.ids[v] for v in self.vertices]
        return {
            "vertices": verts,
            "simplices_by_dim": [[list(s) for s in level] for level in self.simplices_by_dim],
        }

    @classmethod
    def from_dict(cls, d: dict, space: FiniteMetricMeasureSpace | None = None) -> "NerveComplex":
        verts = d["vertices"]
        if space is not None:
            verts = [space.index_of(v) for v in verts]
        return cls(
            tuple(verts),
            tuple(tuple(tuple(s) for s in level) for level in d["simplices_by_dim"]),
        )

    def to_off(self, space: FiniteMetricMeasureSpace | None = None) -> str:
        """Plain-text listing: a header line, one ``v`` line per vertex,
        then one ``s`` line per simplex of dimension >= 1."""
        higher = [s for level in self.simplices_by_dim[1:] for s in level]
        lines = ["NERVE", f"{len(self.vertices)} {len(higher)}"]
        for v in self.vertices:
            lines.append(f"v {space.ids[v] if space is not None else v}")
        for s in higher:
            lines.append(f"s {len(s) - 1} " + " ".join(map(str, s)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_off(cls, text: str, space: FiniteMetricMeasureSpace | None = None) -> "NerveComplex":
        lines = [l for l in text.splitlines() if l.strip()]
        if lines[0].strip() != "NERVE":
            raise ValueError("not a nerve listing")
        nv, ns = map(int, lines[1].split())
        verts = [l.split(maxsplit=1)[1] for l in lines[2 : 2 + nv]]
        verts = [space.index_of(v) for v in verts] if space is not None else [int(v) for v in verts]
        levels: dict = {0: [(k,) for k in range(nv)]}
        for l in lines[2 + nv : 2 + nv + ns]:
            parts = l.split()
            dim = int(parts[1])
            levels.setdefault(dim, []).append(tuple(int(p) for p in parts[2:]))
        top = max(levels)
        return cls(tuple(verts), tuple(tuple(levels.get(k, [])) for k in range(top + 1)))


def voronoi_discretize(space: FiniteMetricMeasureSpace, net: Net) -> Discretization:
    """Assign each point to its nearest center; ties go to the lowest point index."""
    _check(space, net)
    if len(net.centers) == 0:
        raise DomainError("empty net")
    by_index = sorted(net.centers)
    owner = np.asarray(by_index)[np.argmin(space.dist[:, by_index], axis=1)]
    cells = {c: np.flatnonzero(owner == c).tolist() for c in net.centers}
    masses = np.array([space.mass[cells[c]].sum() for c in net.centers])
    return Discretization(net, cells, masses)


def discretization_sequence(space: FiniteMetricMeasureSpace, epsilons, seed_index: int = 0):
    """Discretize at each scale and report W2 to the original measure.

    Both measures are normalized to probability measures before the
    exact transport solve.
    """
    eps = [float(e) for e in epsilons]
    if any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise DomainError("epsilons must be positive and strictly decreasing")
    original = space.mass / space.total_mass
    out = []
    for e in eps:
        net = minimal_epsilon_net(space, e, seed_index)
        disc = voronoi_discretize(space, net)
        atoms = disc.atomic_measure(space.n) / space.total_mass
        out.append((disc, _w2(space.dist, atoms, original).value))
    return out


def nerve_complex(space: FiniteMetricMeasureSpace, net: Net, max_dim: int = 3) -> NerveComplex:
    """Simplices are center sets whose closed epsilon-balls share a witness point.

    Every face of a witnessed simplex shares the same witness, so the
    result is downward closed by construction.
    """
    if max_dim < 1:
        raise DomainError(f"max_dim must be >= 1, got {max_dim}")
    mem = membership(space, net)
    found = [set() for _ in range(max_dim + 1)]
    for row in np.unique(mem, axis=0):
        cover = np.flatnonzero(row).tolist()
        for k in range(1, min(len(cover), max_dim + 1) + 1):
            found[k - 1].update(itertools.combinations(cover, k))
    levels = [tuple(sorted(s)) for s in found]
    while len(levels) > 1 and not levels[-1]:
        levels.pop()
    return NerveComplex(tuple(net.centers), tuple(levels))


def covering_mesh_report(space: FiniteMetricMeasureSpace, net: Net):
    """``(mesh, order)``: largest realized ball diameter bound and covering order.

    The mesh of a ball is taken as twice the farthest member from its
    center, which never exceeds ``2 epsilon``.
    """
    mem = membership(space, net)
    sub = np.where(mem, space.dist[:, list(net.centers)], 0.0)
    mesh = min(2.0 * float(sub.max()), 2.0 * net.epsilon)
    return mesh, covering_order(space, net)
