"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v``; the collected lines are also
repeated in the "acceptance criteria" section of the terminal summary.
"""

import gc
import math
import time

import numpy as np
import pytest

from conftest import central_grad, record, unit_grid
from mmsample import (
    ahlfors_fit,
    bishop_gromov_test,
    build_from_graph,
    build_from_matrix,
    build_from_points,
    chain_metric,
    covering_order,
    discretization_sequence,
    distortion_coefficient,
    embed_metric,
    gromov_hausdorff_bruteforce,
    intersection_degree_bound,
    measure,
    minimal_epsilon_net,
    net_cardinality_bound,
    prokhorov,
    prokhorov_bruteforce,
    quasimetric_pairs,
    quasimetric_q,
    remark_exponent_bound,
    volume_profile,
    weighted_euclidean_ricci,
)
from mmsample.embed import surrogate_loss


# -- criteria 1 and 2: continuum constants of the quasimetric on a fine grid


@pytest.fixture(scope="module")
def grid128():
    t0 = time.perf_counter()
    space = unit_grid(128)
    space.__dict__["build_seconds"] = time.perf_counter() - t0
    yield space
    del space
    gc.collect()


def _interior_pairs(space, count=3000, seed=0):
    """Random pairs with both ends in [0.2, 0.8]^2 and 0.05 <= d <= 0.2."""
    rng = np.random.default_rng(seed)
    c = space.coords
    inner = np.flatnonzero(np.all((c >= 0.2) & (c <= 0.8), axis=1))
    out = []
    while len(out) < count:
        i, j = rng.choice(inner, 2, replace=False)
        if 0.05 <= space.dist[i, j] <= 0.2:
            out.append((i, j))
    return np.array(out)


def test_c01_midpoint_constant(grid128):
    t0 = time.perf_counter()
    pairs = _interior_pairs(grid128)
    d = grid128.dist[pairs[:, 0], pairs[:, 1]]
    q = quasimetric_pairs(grid128, pairs, 0.5, "euclidean_midpoint")
    mean = float(np.mean(q / d))
    target = math.sqrt(math.pi) / 2
    elapsed = time.perf_counter() - t0 + grid128.build_seconds
    ok = abs(mean / target - 1) <= 0.05 and elapsed < 60
    record("C1 midpoint constant", ok, f"mean q/d = {mean:.4f} vs {target:.4f}, {elapsed:.1f}s")
    assert ok


def test_c02_general_constant(grid128):
    t0 = time.perf_counter()
    pairs = _interior_pairs(grid128, seed=1)
    d = grid128.dist[pairs[:, 0], pairs[:, 1]]
    q = quasimetric_pairs(grid128, pairs, 0.5, "general")
    mean = float(np.mean(q / d))
    # two balls of radius d, each of mass pi d^2: (2 pi d^2)^(1/2) = sqrt(2 pi) d
    target = math.sqrt(2 * math.pi)
    elapsed = time.perf_counter() - t0 + grid128.build_seconds
    ok = abs(mean / target - 1) <= 0.05 and elapsed < 60
    record("C2 general constant", ok, f"mean q/d = {mean:.4f} vs {target:.4f}, {elapsed:.1f}s")
    assert ok


# -- criterion 3: net axioms on random spaces


def _random_space(rng, k):
    n = int(rng.integers(2, 301))
    kind = k % 4
    if kind == 0:
        return build_from_points(rng.random((n, int(rng.integers(1, 4)))), rng.random(n) + 0.01)
    if kind == 1:
        return build_from_points(rng.standard_normal((n, 2)), metric_exponent=1.0)
    if kind == 2:
        # random tree plus a few chords, integer weights (many ties)
        edges = [(i, int(rng.integers(0, i)), float(rng.integers(1, 4))) for i in range(1, n)]
        edges += [(int(a), int(b), 1.0) for a, b in rng.integers(0, n, (n // 10, 2)) if a != b]
        return build_from_graph([(i, 1.0) for i in range(n)], edges)
    # random metric from a complete graph with weights in [1, 2]
    n = min(n, 120)
    w = 1 + rng.random((n, n))
    w = np.minimum(w, w.T)
    np.fill_diagonal(w, 0)
    from scipy.sparse.csgraph import shortest_path

    return build_from_matrix(shortest_path(w))


def test_c03_net_axioms():
    rng = np.random.default_rng(2024)
    failures, checked = 0, 0
    for k in range(200):
        space = _random_space(rng, k)
        for seed in range(3):
            eps = float(rng.uniform(0.05, 1.0)) * space.diameter
            net = minimal_epsilon_net(space, eps, int(rng.integers(0, space.n)))
            sub = space.dist[:, list(net.centers)]
            cov = float(sub.min(axis=1).max())
            sep = (
                math.inf
                if len(net) == 1
                else float(np.min(space.dist[np.ix_(net.centers, net.centers)] + np.diag([math.inf] * len(net))))
            )
            checked += 1
            if not (cov <= eps and sep > eps):
                failures += 1
    ok = failures == 0
    record("C3 net axioms", ok, f"{failures} failures over {checked} nets")
    assert ok


# -- criteria 4 and 5: net size and covering order against the curvature bounds


@pytest.fixture(scope="module")
def square_sample():
    rng = np.random.default_rng(7)
    space = build_from_points(rng.random((4096, 2)))
    yield space
    del space
    gc.collect()


EPSILONS = (0.1, 0.2, 0.4)


def test_c04_cardinality_bound(square_sample):
    rows, failures = [], 0
    for eps in EPSILONS:
        net = minimal_epsilon_net(square_sample, eps)
        bound = net_cardinality_bound(0, 2, math.sqrt(2), eps)
        failures += len(net) > bound
        rows.append(f"eps={eps}: {len(net)} <= {bound}")
    ok = failures == 0
    record("C4 net cardinality bound", ok, "; ".join(rows))
    assert ok


def test_c05_covering_order_bound(square_sample):
    rows, failures, worst = [], 0, 0
    for eps in EPSILONS:
        net = minimal_epsilon_net(square_sample, eps)
        order = covering_order(square_sample, net)
        bound = intersection_degree_bound(0, 2, eps, math.sqrt(2))
        failures += order > bound or bound != 81
        worst = max(worst, order)
        rows.append(f"eps={eps}: order {order} <= {bound}")
    ok = failures == 0
    record("C5 covering order bound", ok, "; ".join(rows) + f"; observed max {worst} (regression <= 10: {worst <= 10})")
    assert ok
    assert worst <= 10


# -- criterion 6: chain metric sandwich on doubling fixtures


def _doubling_fixtures():
    rng = np.random.default_rng(11)
    g = np.array([[i, j] for i in range(12) for j in range(12)], float)
    levels = np.array(np.meshgrid(*[[0, 1]] * 6)).reshape(6, -1).T
    cantor = levels @ (2.0 / 3.0 ** np.arange(1, 7))
    return {
        "grid": build_from_points(g),
        "square": build_from_points(rng.random((150, 2))),
        "segment": build_from_points(np.sort(rng.random(100))),
        "weighted segment": build_from_points(np.linspace(0, 1, 80), rng.random(80) + 0.1),
        "cube": build_from_points(rng.random((120, 3))),
        "cantor": build_from_points(cantor),
        "path graph": build_from_graph([(i, 1.0) for i in range(60)], [(i, i + 1, 1.0) for i in range(59)]),
        "l1 square": build_from_points(rng.random((100, 2)), metric_exponent=1.0),
    }


def test_c06_chain_metric_sandwich():
    failures, checked, worst = 0, 0, 0.0
    for name, space in _doubling_fixtures().items():
        variants = ["general", "plain_snowflake"] + (["euclidean_midpoint"] if space.coords is not None else [])
        for variant in variants:
            K = quasimetric_q(space, 1.0, variant).K
            s_max = remark_exponent_bound(K)
            for s in (s_max, s_max / 2):
                ch = chain_metric(quasimetric_q(space, s, variant))
                bound = (2 * K) ** (2 * s)
                checked += 1
                worst = max(worst, ch.max_ratio / bound)
                if not (ch.max_ratio <= bound * (1 + 1e-12) and ch.min_ratio >= 1 - 1e-12):
                    failures += 1
    ok = failures == 0
    record("C6 chain metric sandwich", ok, f"{failures} failures over {checked} cases, worst max_ratio/bound {worst:.3f}")
    assert ok


# -- criterion 7: Prokhorov flow value against subset enumeration


def test_c07_prokhorov_oracle():
    rng = np.random.default_rng(5)
    t0 = time.perf_counter()
    failures, worst = 0, 0.0
    for k in range(200):
        n = int(rng.integers(2, 9))
        if k % 2:
            space = build_from_points(rng.random((n, 2)))
        else:
            space = build_from_points(rng.integers(0, 4, n * 2).reshape(n, 2) + 1e-3 * np.arange(2 * n).reshape(n, 2))
        def rand_weights():
            w = rng.random(n) * (rng.random(n) < 0.7)
            if not w.sum() > 0:
                w[rng.integers(0, n)] = 1.0
            return w
        mu, nu = measure(space, rand_weights()), measure(space, rand_weights())
        fast = prokhorov(space, mu, nu).value
        slow = prokhorov_bruteforce(space, mu, nu)
        worst = max(worst, abs(fast - slow))
        failures += abs(fast - slow) > 1e-6
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and elapsed < 120
    record("C7 Prokhorov oracle equivalence", ok, f"{failures} failures, max gap {worst:.2e}, {elapsed:.1f}s")
    assert ok


# -- criterion 8: W2 convergence of Voronoi discretizations


def test_c08_w2_discretization():
    space = unit_grid(32)
    seq = discretization_sequence(space, [0.4, 0.2, 0.1])
    w = [v for _, v in seq]
    within = all(v <= e for v, e in zip(w, (0.4, 0.2, 0.1)))
    monotone = all(b <= a for a, b in zip(w, w[1:]))
    ok = within and monotone
    record("C8 W2 discretization", ok, "W2 = " + ", ".join(f"{v:.4f}" for v in w))
    assert ok


# -- criterion 9: Bishop-Gromov test, dense grid versus two clusters


def test_c09_bishop_gromov():
    grid = unit_grid(96)
    c = grid.coords
    inner = np.flatnonzero(np.all((c >= 0.35) & (c <= 0.65), axis=1))
    clean = bishop_gromov_test(grid, 0, 2, 0.15, centers=inner)
    del grid
    gc.collect()
    blob = np.array([[i / 4, j / 4] for i in range(5) for j in range(5)])
    two = build_from_points(np.vstack([blob, blob + [100.0, 0.0]]), np.full(50, 1 / 25))
    split = bishop_gromov_test(two, 0, 2, 0.15)
    ok = clean.consistent and not split.consistent
    record(
        "C9 Bishop-Gromov",
        ok,
        f"grid violations {len(clean.violations)}, two-cluster violations {len(split.violations)}",
    )
    assert ok


# -- criterion 10: Gromov-Hausdorff brute force on two-point spaces


def test_c10_gh_two_point():
    failures = []
    for a, b in [(1, 1), (1, 3), (2, 5)]:
        x = build_from_points([[0.0], [float(a)]])
        y = build_from_points([[0.0], [float(b)]])
        v = gromov_hausdorff_bruteforce(x, y).value
        if v != abs(a - b) / 2:
            failures.append((a, b, v))
    x = build_from_points([[0, 0], [1, 0], [0, 2]])
    if gromov_hausdorff_bruteforce(x, x).value != 0:
        failures.append("X=X")
    ok = not failures
    record("C10 GH brute force", ok, f"failures {failures}" if failures else "exact on all cases")
    assert ok


# -- criterion 11: Ahlfors exponent of uniform samples


def test_c11_ahlfors_fit():
    rng = np.random.default_rng(3)
    pts = rng.random((10_000, 2))
    plane = build_from_points(pts)
    inner = np.flatnonzero(np.all((pts >= 0.3) & (pts <= 0.7), axis=1))[:600]
    a2 = ahlfors_fit(plane, np.geomspace(0.02, 0.2, 12), inner).alpha
    del plane
    gc.collect()
    x = rng.random(1000)
    seg = build_from_points(x)
    inner = np.flatnonzero((x >= 0.3) & (x <= 0.7))
    a1 = ahlfors_fit(seg, np.geomspace(0.01, 0.2, 12), inner).alpha
    ok = 1.85 <= a2 <= 2.15 and 0.9 <= a1 <= 1.1
    record("C11 Ahlfors fit", ok, f"square alpha {a2:.3f}, segment alpha {a1:.3f}")
    assert ok


# -- criterion 12: embedding sanity


def test_c12_embedding():
    rng = np.random.default_rng(12)
    worst, grad_err = 1.0, 0.0
    for _ in range(50):
        n = int(rng.integers(3, 21))
        pts = rng.random((n, 3))
        space = build_from_points(pts)
        res = embed_metric(space.dist, 3, seed=int(rng.integers(1 << 30)), restarts=2)
        worst = max(worst, res.distortion_L)
        # gradient of the surrogate at a random configuration
        iu = np.triu_indices(n, 1)
        flat = rng.standard_normal(n * 3)
        _, g = surrogate_loss(flat, space.dist[iu], n, 3)
        fd = central_grad(lambda z: surrogate_loss(z, space.dist[iu], n, 3)[0], flat)
        grad_err = max(grad_err, float(np.linalg.norm(g - fd) / np.linalg.norm(fd)))
    ok = worst <= 1.05 and grad_err < 1e-5
    record("C12 embedding sanity", ok, f"worst L {worst:.6f}, gradient rel. error {grad_err:.2e}")
    assert ok


# -- criterion 13: closed-form spot checks


def test_c13_closed_forms():
    checks = {}
    checks["volume_profile(0,3,2) = 8/3"] = abs(volume_profile(0, 3, 2) - 8 / 3) <= 1e-12
    checks["h bound 81"] = all(
        intersection_degree_bound(0, 2, e, 2 * e) == 81 for e in (0.01, 0.1, 0.37, 1.0, 5.0)
    )
    checks["beta_0 = 1"] = all(
        distortion_coefficient(K, N, 0.0, d) == 1.0
        for K, N, d in [(0, 2, 1.0), (1, 3, 1.0), (-1, 2, 2.0), (-1, math.inf, 0.5), (2, 4, 0.3)]
    )
    errs = []
    for h in (0.1, 0.05, 0.025):
        x = np.arange(-1.0, 1.0 + h / 2, h)
        ric = weighted_euclidean_ricci(x**2, h, math.inf, [len(x) // 3])
        errs.append(abs(ric - 2.0))
    # second differences of a quadratic are exact, so the O(h^2) term vanishes
    checks["Ric(V=x^2, inf) = 2"] = all(e <= h**2 for e, h in zip(errs, (0.1, 0.05, 0.025)))
    failed = [k for k, v in checks.items() if not v]
    ok = not failed
    record("C13 closed-form spot checks", ok, "failed: " + ", ".join(failed) if failed else "all exact")
    assert ok
