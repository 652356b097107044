"""Curvature-dimension comparison tools.

Model-space volume profiles, the Bishop-Gromov monotonicity test on data,
explicit net-size bounds derived from volume ratios, reference distortion
coefficients, and the weighted Ricci form of a density on R^n.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate

from .errors import DomainError
from .space import FiniteMetricMeasureSpace, ball_mass_profile, default_radii

__all__ = [
    "CurvatureParams",
    "BoundsReport",
    "BGReport",
    "s_profile",
    "volume_profile",
    "conjugate_radius",
    "bishop_gromov_test",
    "net_cardinality_bound",
    "intersection_degree_bound",
    "intersection_degree_ratio",
    "same_pattern_bound",
    "bounds_report",
    "distortion_coefficient",
    "weighted_euclidean_ricci",
    "cd_ahlfors_bound",
    "CDAhlforsBound",
]

_SNAP = 1e-9


def _floor(x: float) -> int:
    r = round(x)
    return int(r) if abs(x - r) <= _SNAP * max(1.0, abs(x)) else math.floor(x)


def _ceil(x: float) -> int:
    r = round(x)
    return int(r) if abs(x - r) <= _SNAP * max(1.0, abs(x)) else math.ceil(x)


@dataclass(frozen=True)
class CurvatureParams:
    K: float
    N: float
    D: float

    def __post_init__(self):
        if not self.N >= 1:
            raise DomainError(f"N must be >= 1, got {self.N}")
        if not self.D > 0:
            raise DomainError(f"D must be positive, got {self.D}")
        if self.K != 0 and self.N == 1:
            raise DomainError("K != 0 requires N > 1")


def conjugate_radius(K: float, N: float) -> float:
    """``pi sqrt((N-1)/K)`` for ``K > 0``, infinity otherwise."""
    if K > 0:
        return math.pi * math.sqrt((N - 1) / K)
    return math.inf


def _check_kn(K, N, t):
    if not N >= 1:
        raise DomainError(f"N must be >= 1, got {N}")
    if K != 0 and not N > 1:
        raise DomainError(f"K != 0 requires N > 1, got N = {N}")
    if t < 0:
        raise DomainError(f"t must be nonnegative, got {t}")
    if K > 0 and t > conjugate_radius(K, N) * (1 + 1e-12):
        raise DomainError(
            f"t = {t} exceeds the conjugate radius {conjugate_radius(K, N)} for K = {K}, N = {N}"
        )


def s_profile(K: float, N: float, t: float) -> float:
    """Model density: ``(sin(c t) / c)^(N-1)``, ``t^(N-1)`` or
    ``(sinh(c t) / c)^(N-1)`` for ``K > 0``, ``K = 0``, ``K < 0``, with
    ``c = sqrt(|K| / (N-1))``.

    The ``1/c`` normalization makes both curved branches tend to
    ``t^(N-1)`` as ``K -> 0``; it cancels in every volume ratio.
    """
    _check_kn(K, N, t)
    if K == 0:
        return t ** (N - 1)
    c = math.sqrt(abs(K) / (N - 1))
    base = math.sin(c * t) if K > 0 else math.sinh(c * t)
    return (max(base, 0.0) / c) ** (N - 1)


def _sin_power_integral(m: int, x: float) -> float:
    # int_0^x sin^m(u) du by the standard reduction formula
    if m == 0:
        return x
    if m == 1:
        return 2 * math.sin(x / 2) ** 2
    return -(math.sin(x) ** (m - 1)) * math.cos(x) / m + (m - 1) / m * _sin_power_integral(m - 2, x)


def _sinh_power_integral(m: int, x: float) -> float:
    if m == 0:
        return x
    if m == 1:
        return 2 * math.sinh(x / 2) ** 2
    return math.sinh(x) ** (m - 1) * math.cosh(x) / m - (m - 1) / m * _sinh_power_integral(m - 2, x)


def volume_profile(K: float, N: float, r: float, method: str = "auto") -> float:
    """``int_0^r S_K^N(t) dt``.

    Closed forms are used for integer ``N`` (``method="auto"``); other
    ``N``, or ``method="quad"``, fall back to adaptive quadrature with
    absolute tolerance 1e-10.
    """
    _check_kn(K, N, r)
    if r == 0:
        return 0.0
    closed = method == "auto" and float(N).is_integer()
    if K == 0:
        if closed or method == "auto":
            return r**N / N
    c = 1.0 if K == 0 else math.sqrt(abs(K) / (N - 1))
    # the reduction recursion cancels for small arguments when N > 2
    if closed and (N <= 2 or c * r > 1e-2):
        m = int(N) - 1
        if K > 0:
            return _sin_power_integral(m, c * r) / c ** (m + 1)
        return _sinh_power_integral(m, c * r) / c ** (m + 1)
    scale = r**N / N
    val, _ = integrate.quad(
        lambda t: s_profile(K, N, t), 0.0, r, epsabs=min(1e-10, 1e-13 * scale), epsrel=1e-12, limit=200
    )
    return float(val)


@dataclass
class BGReport:
    violations: list = field(default_factory=list)
    tolerance: float = 0.0
    K: float = 0.0
    N: float = 2.0
    radii: list = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        d = asdict(self)
        d["violations"] = [list(v) for v in self.violations]
        d["consistent"] = self.consistent
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BGReport":
        return cls(
            [(int(v[0]), *map(float, v[1:])) for v in d["violations"]],
            d["tolerance"],
            d["K"],
            d["N"],
            list(d["radii"]),
        )


def bg_radii(space: FiniteMetricMeasureSpace, n_radii: int = 48, lattice_factor: float = 8.0) -> np.ndarray:
    """Log-spaced probe radii for the Bishop-Gromov test.

    Below a few multiples of the resolution the ball count is dominated by
    lattice effects (a whole ring of equidistant points enters at once), so
    the grid starts at ``lattice_factor * resolution`` when that is still
    below the diameter, and at half the resolution otherwise.  The grid is
    finer than the regularity default because mass jumps across a gap are
    only visible between close radii.
    """
    lo = lattice_factor * space.resolution
    if not lo < space.diameter:
        lo = 0.5 * space.resolution
    return default_radii(space, n_radii, r_min=lo)


def bishop_gromov_test(
    space: FiniteMetricMeasureSpace,
    K: float,
    N: float,
    tolerance: float = 0.15,
    radii=None,
    centers=None,
    n_radii: int = 48,
) -> BGReport:
    """Check that ``mu(B[x, r]) / V(r)`` is nonincreasing in ``r``.

    ``V`` is :func:`volume_profile`.  For each center and each consecutive
    pair of probe radii ``r_s < r_l`` a violation ``(x, r_s, r_l, ratio_s,
    ratio_l)`` is recorded when ``ratio_l > (1 + tolerance) ratio_s``.
    Default radii come from :func:`bg_radii`.
    """
    if space.n == 1:
        return BGReport([], tolerance, K, N, [])
    if radii is None:
        r = bg_radii(space, n_radii)
    else:
        r = np.sort(np.asarray(radii, dtype=float))
    r = r[r > 0]
    if K > 0 and len(r) and r[-1] > conjugate_radius(K, N):
        raise DomainError("probe radii exceed the conjugate radius of the model space")
    vol = np.array([volume_profile(K, N, x) for x in r])
    centers = np.arange(space.n) if centers is None else np.asarray(centers, dtype=int)
    ratio = ball_mass_profile(space, r, centers) / vol
    bad = ratio[:, 1:] > (1 + tolerance) * ratio[:, :-1]
    viol = [
        (int(centers[c]), float(r[j]), float(r[j + 1]), float(ratio[c, j]), float(ratio[c, j + 1]))
        for c, j in np.argwhere(bad)
    ]
    return BGReport(viol, float(tolerance), float(K), float(N), [float(x) for x in r])


def net_cardinality_bound(K: float, N: float, D: float, epsilon: float) -> int:
    """``floor(V(D) / V(epsilon / 2))``: most centers a minimal net can have."""
    if not 0 < epsilon <= 2 * D * (1 + 1e-12):
        raise DomainError(f"need 0 < epsilon <= 2D, got epsilon = {epsilon}, D = {D}")
    return _floor(volume_profile(K, N, D) / volume_profile(K, N, epsilon / 2))


def intersection_degree_ratio(K: float, N: float, epsilon: float) -> float:
    """``h(epsilon) = V(9 epsilon / 2) / V(epsilon / 2)``."""
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    return volume_profile(K, N, 4.5 * epsilon) / volume_profile(K, N, 0.5 * epsilon)


def intersection_degree_bound(K: float, N: float, epsilon: float, D: float, uniform: bool = False, grid: int = 200) -> int:
    """Bound on how many net balls meet a single epsilon-ball.

    With ``uniform=False`` this is ``ceil(h(epsilon))``.  With
    ``uniform=True`` it is ``ceil(max h)`` over ``grid`` values of epsilon
    in ``(0, 2D/9]``, an epsilon-free constant.  For ``K = 0``,
    ``h = 9^N`` identically.
    """
    if not D > 0:
        raise DomainError(f"D must be positive, got {D}")
    if not uniform:
        return _ceil(intersection_degree_ratio(K, N, epsilon))
    eps = np.linspace(2 * D / 9 / grid, 2 * D / 9, grid)
    return _ceil(max(intersection_degree_ratio(K, N, e) for e in eps))


def same_pattern_bound(K: float, N: float, C: float, epsilon: float, D: float | None = None):
    """``(n', n3)`` for two nets sharing an intersection pattern.

    ``n' = ceil(V((4k + 1) epsilon / 2) / V(epsilon / 2))`` with the step
    count fixed at ``k = ceil(C)``; ``n3 = 2 (n' - 1)`` and the guarantee is
    ``d2(q_i, q_j) < n3 * epsilon`` whenever ``d1(p_i, p_j) < C * epsilon``.
    """
    if not C >= 1:
        raise DomainError(f"C must be >= 1, got {C}")
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    k = math.ceil(C)
    n_prime = _ceil(volume_profile(K, N, (4 * k + 1) * epsilon / 2) / volume_profile(K, N, epsilon / 2))
    return n_prime, 2 * (n_prime - 1)


@dataclass
class BoundsReport:
    n1: int
    n2: int
    n3: int
    epsilon: float
    C: float
    K: float = 0.0
    N: float = 2.0
    D: float = 1.0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "BoundsReport":
        return cls(**d)


def bounds_report(K: float, N: float, D: float, epsilon: float, C: float = 1.0) -> BoundsReport:
    CurvatureParams(K, N, D)
    return BoundsReport(
        net_cardinality_bound(K, N, D, epsilon),
        intersection_degree_bound(K, N, epsilon, D),
        same_pattern_bound(K, N, C, epsilon, D)[1],
        float(epsilon),
        float(C),
        float(K),
        float(N),
        float(D),
    )


def distortion_coefficient(K: float, N: float, t: float, d: float, infinite_form: str = "printed") -> float:
    """Reference distortion coefficient ``beta_t^(K,N)`` at distance ``d``.

    ``infinite_form`` selects the ``N = inf`` exponent: ``"printed"`` uses
    ``K/6 (1 - t^2) d``, ``"squared"`` the ``d^2`` form common elsewhere.
    """
    if not 0 <= t <= 1:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    if not N >= 1:
        raise DomainError(f"N must be >= 1, got {N}")
    if d < 0:
        raise DomainError(f"distance must be nonnegative, got {d}")
    if t == 0:
        return 1.0
    if math.isinf(N):
        if infinite_form == "printed":
            return math.exp(K / 6 * (1 - t * t) * d)
        if infinite_form == "squared":
            return math.exp(K / 6 * (1 - t * t) * d * d)
        raise DomainError(f"unknown infinite_form {infinite_form!r}")
    if N == 1:
        return math.inf if K > 0 else 1.0
    if K == 0:
        return 1.0
    alpha = math.sqrt(abs(K) / (N - 1)) * d
    if alpha == 0:
        return 1.0
    if K > 0:
        if alpha > math.pi:
            return math.inf
        s = math.sin(alpha)
        if s <= 0:
            return 1.0 if t == 1 else math.inf
        return (math.sin(t * alpha) / (t * s)) ** (N - 1)
    return (math.sinh(t * alpha) / (t * math.sinh(alpha))) ** (N - 1)


def weighted_euclidean_ricci(V, spacing, N_eff: float, query) -> float:
    """Smallest eigenvalue of ``Hess V - grad V (x) grad V / (N_eff - n)``.

    ``V`` is a potential sampled on a regular grid (``V.ndim = n``), the
    reference measure being ``exp(-V) dx`` on flat R^n.  Derivatives are
    central differences at the interior grid point ``query``; with
    ``N_eff = inf`` the rank-one term is dropped.
    """
    V = np.asarray(V, dtype=float)
    n = V.ndim
    h = np.broadcast_to(np.asarray(spacing, dtype=float), (n,))
    q = tuple(int(i) for i in np.atleast_1d(query))
    if len(q) != n:
        raise DomainError(f"query must have {n} indices")
    if not N_eff > n:
        raise DomainError(f"N_eff must exceed the dimension {n}, got {N_eff}")
    if any(i < 1 or i > V.shape[a] - 2 for a, i in enumerate(q)):
        raise DomainError(f"query {q} is on or outside the grid boundary")

    def at(offsets):
        return V[tuple(qi + o for qi, o in zip(q, offsets))]

    def e(a, k=1):
        off = [0] * n
        off[a] = k
        return off

    grad = np.array([(at(e(a)) - at(e(a, -1))) / (2 * h[a]) for a in range(n)])
    hess = np.empty((n, n))
    v0 = V[q]
    for a in range(n):
        hess[a, a] = (at(e(a)) - 2 * v0 + at(e(a, -1))) / h[a] ** 2
        for b in range(a + 1, n):
            pp = [0] * n
            pp[a], pp[b] = 1, 1
            pm = [0] * n
            pm[a], pm[b] = 1, -1
            mp = [0] * n
            mp[a], mp[b] = -1, 1
            mm = [0] * n
            mm[a], mm[b] = -1, -1
            hess[a, b] = hess[b, a] = (at(pp) - at(pm) - at(mp) + at(mm)) / (4 * h[a] * h[b])
    form = hess
    if not math.isinf(N_eff):
        form = hess - np.outer(grad, grad) / (N_eff - n)
    return float(np.linalg.eigvalsh(form).min())


@dataclass
class CDAhlforsBound:
    C2: float
    C1: float | None
    note: str

    def __iter__(self):
        return iter((self.note, self.C2))


def cd_ahlfors_bound(K: float, N: float, D: float, space: FiniteMetricMeasureSpace | None = None, grid: int = 2000) -> CDAhlforsBound:
    """Upper Ahlfors constant of the model space: ``sup V(r) / r^N`` on ``(0, D]``.

    The supremum includes the ``r -> 0`` limit ``1 / N``.  The lower
    constant depends on the total mass of the actual space; when ``space``
    is given, ``C1 = min mu(B[x, r]) / r^N`` over the default probe grid is
    reported as its empirical counterpart.
    """
    if K < 0:
        raise DomainError("the Ahlfors bound needs K >= 0")
    CurvatureParams(K, N, D)
    if K > 0 and D > conjugate_radius(K, N):
        raise DomainError("D exceeds the conjugate radius")
    if K == 0:
        c2 = 1.0 / N
    else:
        rs = np.linspace(D / grid, D, grid)
        c2 = max(1.0 / N, max(volume_profile(K, N, r) / r**N for r in rs))
    c1 = None
    if space is not None and space.n > 1:
        r = default_radii(space)
        prof = ball_mass_profile(space, r)
        c1 = float((prof / r**N).min())
    note = "C1 = C * mu(X) depends on the total mass; only its empirical value is computed"
    return CDAhlforsBound(float(c2), c1, note)
