"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 parameter outside an operation's
domain, 4 input rejected by a size guard.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .curvature import bg_radii, bishop_gromov_test, bounds_report, s_profile, volume_profile
from .discretize import covering_mesh_report, nerve_complex, voronoi_discretize
from .distances import (
    GH_SIZE_LIMIT,
    ghp_common,
    gromov_hausdorff_bruteforce,
    hausdorff,
    measure,
    prokhorov,
    wasserstein2,
)
from .embed import embed_metric, embed_snowflake
from .errors import DomainError, MMSError, SizeGuardError, ValidationError
from .nets import covering_order, minimal_epsilon_net
from .regularity import regularity_report
from .snowflake import VARIANTS, chain_metric, quasimetric_q
from .space import validate

EXIT_OK, EXIT_INVALID, EXIT_DOMAIN, EXIT_SIZE = 0, 2, 3, 4

AHLFORS_RESIDUAL_MAX = math.log(4.0)


def _emit(args, payload) -> None:
    text = io.dumps(payload)
    if getattr(args, "out", None):
        io.atomic_write(args.out, text)
    else:
        sys.stdout.write(text)


def _load(args, path=None):
    path = path or args.input
    if path is None:
        raise ValidationError("an input file is required")
    if not Path(path).exists():
        raise ValidationError(f"input file {path} does not exist")
    return io.read_space(path, args.format, args.masses, args.p)


def cmd_validate(args):
    fmt = args.format or io.sniff_format(args.input)
    if fmt == "matrix":
        d = io.read_matrix_csv(args.input)
        m = io.read_vector_csv(args.masses) if args.masses else None
        rep = validate(d, m, args.tol)
    else:
        space = _load(args)
        rep = validate(space.dist, space.mass, args.tol)
    _emit(args, rep.to_dict())
    if not rep.ok:
        parts = []
        if rep.asymmetric_pairs:
            i, j = rep.asymmetric_pairs[0]
            parts.append(f"asymmetric pair ({i}, {j})")
        if rep.triangle_violations:
            i, j, k, x = rep.triangle_violations[0]
            parts.append(f"triangle violation ({i}, {j}, {k}) by {x:g}")
        if rep.zero_distance_pairs:
            parts.append(f"zero distance pair {tuple(rep.zero_distance_pairs[0])}")
        if rep.negative_masses:
            parts.append(f"negative mass at {rep.negative_masses[0]}")
        print("validation failed: " + "; ".join(parts or ["see report"]), file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def cmd_net(args):
    space = _load(args)
    net = minimal_epsilon_net(space, _need(args.eps, "--eps"), args.seed)
    _emit(args, net.to_dict(space))
    return EXIT_OK


def cmd_snowflake(args):
    space = _load(args)
    q = quasimetric_q(space, _need(args.s, "--s"), args.variant)
    summary = q.sidecar()
    if args.chain:
        ch = chain_metric(q)
        summary["chain"] = {
            "max_ratio": ch.max_ratio,
            "min_ratio": ch.min_ratio,
            "remark_bound": (2 * q.K) ** (2 * q.s),
        }
    if args.out:
        io.write_quasimetric(args.out, q)
        if args.chain:
            io.write_json(Path(args.out).with_suffix(".chain.json"), summary["chain"])
    else:
        sys.stdout.write(io.dumps(summary))
    return EXIT_OK


def cmd_regularity(args):
    space = _load(args)
    _emit(args, regularity_report(space, n_radii=args.n_radii).to_dict())
    return EXIT_OK


def cmd_curvature(args):
    K, N, D = args.K, _need(args.N, "--N"), _need(args.D, "--D")
    eps = args.eps if args.eps is not None else D / 4
    out = {"bounds": bounds_report(K, N, D, eps, args.C).to_dict()}
    if args.input:
        space = _load(args)
        tol = 0.15 if args.tol is None else args.tol
        out["bishop_gromov"] = bishop_gromov_test(space, K, N, tol).to_dict()
    if args.table:
        ts = np.linspace(0.0, D, args.table_points)
        lines = ["t,S,int_S"] + [
            f"{t:.17g},{s_profile(K, N, t):.17g},{volume_profile(K, N, t):.17g}" for t in ts
        ]
        io.atomic_write(args.table, "\n".join(lines) + "\n")
    _emit(args, out)
    return EXIT_OK


def _read_measure(space, path):
    w = io.read_vector_csv(path)
    return measure(space, w)


def cmd_distance(args):
    if args.kind == "gh":
        if args.space2 is None:
            raise ValidationError("gh needs --space2")
        a = _load(args, args.space)
        b = _load(args, args.space2)
        if a.n + b.n > GH_SIZE_LIMIT:
            raise SizeGuardError(f"|X| + |Y| = {a.n + b.n} exceeds the enumeration limit {GH_SIZE_LIMIT}")
        res = gromov_hausdorff_bruteforce(a, b)
        payload = res.to_dict()
        payload["correspondence"] = [[a.ids[i], b.ids[j]] for i, j in res.certificate]
        _emit(args, payload)
        return EXIT_OK
    space = _load(args, args.space)
    if args.mu is None or args.nu is None:
        raise ValidationError(f"{args.kind} needs --mu and --nu")
    mu, nu = _read_measure(space, args.mu), _read_measure(space, args.nu)
    if args.kind == "hausdorff":
        res = hausdorff(space, mu.support, nu.support)
    elif args.kind == "prokhorov":
        res = prokhorov(space, mu, nu, args.tol)
    elif args.kind == "w2":
        res = wasserstein2(space, mu, nu)
    else:
        res = ghp_common(space, mu, nu, args.tol)
    if args.coupling_out and res.certificate is not None:
        io.write_matrix_csv(args.coupling_out, res.certificate)
    _emit(args, res.to_dict())
    return EXIT_OK


def cmd_discretize(args):
    from .distances import _w2

    space = _load(args)
    net = minimal_epsilon_net(space, _need(args.eps, "--eps"), args.seed)
    disc = voronoi_discretize(space, net)
    atoms = disc.atomic_measure(space.n) / space.total_mass
    payload = disc.to_dict(space)
    payload["w2_to_original"] = _w2(space.dist, atoms, space.mass / space.total_mass).value
    mesh, order = covering_mesh_report(space, net)
    payload["mesh"], payload["order"] = mesh, order
    if args.nerve_out:
        nerve = nerve_complex(space, net, args.max_dim)
        if str(args.nerve_out).endswith(".off"):
            io.atomic_write(args.nerve_out, nerve.to_off(space))
        else:
            io.write_json(args.nerve_out, nerve.to_dict(space))
    _emit(args, payload)
    return EXIT_OK


def cmd_embed(args):
    space = _load(args)
    eps = _need(args.eps, "--eps")
    dim = _need(args.dim, "--dim")
    if eps == 1:
        res = embed_metric(space.dist, dim, args.seed, args.max_iters, args.restarts)
    else:
        res = embed_snowflake(space, eps, dim, args.seed, args.max_iters, args.restarts)
    payload = res.to_dict()
    payload["snowflake_eps"] = eps
    coords_out = args.coords_out
    if coords_out is None and args.out:
        coords_out = str(Path(args.out).with_suffix(".coords.csv"))
    if coords_out:
        io.write_points_csv(coords_out, res.coords)
        payload["coords"] = coords_out
    _emit(args, payload)
    return EXIT_OK


def build_report(space, eps=None, K=0.0, N=2.0, seed=0, tol=0.15) -> dict:
    """Consolidated diagnostics answering which sampling method fits the data."""
    rep = {
        "n_points": space.n,
        "diameter": space.diameter,
        "total_mass": space.total_mass,
        "validation": validate(space.dist, space.mass).to_dict(),
    }
    if space.n == 1:
        rep["degenerate"] = True
        rep["regime"] = {
            "note": "single point: every construction is trivial",
            "recommended": [],
        }
        return rep
    rep["degenerate"] = False
    reg = regularity_report(space)
    rep["regularity"] = reg.to_dict()
    eps = space.diameter / 4 if eps is None else eps
    net = minimal_epsilon_net(space, eps, seed)
    order = covering_order(space, net)
    rep["net"] = dict(net.to_dict(space), size=len(net), covering_order=order)
    try:
        b = bounds_report(K, N, space.diameter, eps)
        rep["bounds"] = b.to_dict()
        rep["bounds_satisfied"] = {"cardinality": len(net) <= b.n1, "covering_order": order <= b.n2}
    except DomainError as exc:
        rep["bounds"] = None
        rep["bounds_error"] = str(exc)
    radii = bg_radii(space, 32)
    try:
        bg = bishop_gromov_test(space, K, N, tol, radii=radii)
        rep["bishop_gromov"] = dict(bg.to_dict(), n_violations=len(bg.violations))
        rep["bishop_gromov"]["violations"] = rep["bishop_gromov"]["violations"][:50]
        bg_ok = bg.consistent
    except DomainError as exc:
        rep["bishop_gromov"] = {"error": str(exc)}
        bg_ok = False
    ahlfors = reg.ahlfors_residual <= AHLFORS_RESIDUAL_MAX
    recommended = ["measure comparison (Prokhorov / Wasserstein)"]
    if bg_ok:
        recommended.insert(0, "epsilon-net triangulation under curvature bounds")
    if ahlfors:
        recommended.append("snowflake quasimetric nets")
    rep["regime"] = {
        "bishop_gromov_consistent": bg_ok,
        "ahlfors_regular": ahlfors,
        "ahlfors_alpha": reg.ahlfors_alpha,
        "doubling": math.isfinite(reg.measure_doubling_D),
        "uniformly_perfect_on_grid": math.isfinite(reg.uniform_perfectness_C5),
        "recommended": recommended,
    }
    return rep


def cmd_report(args):
    space = _load(args)
    tol = 0.15 if args.tol is None else args.tol
    _emit(args, build_report(space, args.eps, args.K, 2.0 if args.N is None else args.N, args.seed, tol))
    return EXIT_OK


def _need(value, flag):
    if value is None:
        raise ValidationError(f"missing required parameter {flag}")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mmsample", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, needs_input=True):
        if needs_input:
            sp.add_argument("input", nargs="?" if needs_input == "optional" else None)
        sp.add_argument("--format", choices=["points", "graph", "matrix"])
        sp.add_argument("--masses", help="companion mass CSV for matrix input")
        sp.add_argument("--p", type=float, default=2.0, help="l_p exponent for point input")
        sp.add_argument("--out")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--tol", type=float)

    sp = sub.add_parser("validate", help="check metric measure space axioms")
    common(sp)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("net", help="greedy minimal epsilon-net")
    common(sp)
    sp.add_argument("--eps", type=float)
    sp.set_defaults(func=cmd_net)

    sp = sub.add_parser("snowflake", help="measure-driven quasimetric")
    common(sp)
    sp.add_argument("--s", type=float)
    sp.add_argument("--variant", choices=VARIANTS, default="general")
    sp.add_argument("--chain", action="store_true", help="also report the chain metric sandwich")
    sp.set_defaults(func=cmd_snowflake)

    sp = sub.add_parser("regularity", help="doubling / Ahlfors / uniform perfectness")
    common(sp)
    sp.add_argument("--n-radii", type=int, default=16)
    sp.set_defaults(func=cmd_regularity)

    sp = sub.add_parser("curvature", help="net bounds, profile table, Bishop-Gromov test")
    common(sp, needs_input="optional")
    sp.add_argument("--K", type=float, default=0.0)
    sp.add_argument("--N", type=float)
    sp.add_argument("--D", type=float)
    sp.add_argument("--eps", type=float)
    sp.add_argument("--C", type=float, default=1.0)
    sp.add_argument("--table", help="write t,S,int_S CSV here")
    sp.add_argument("--table-points", type=int, default=101)
    sp.set_defaults(func=cmd_curvature)

    sp = sub.add_parser("distance", help="distances between sets, measures and spaces")
    common(sp, needs_input=False)
    sp.add_argument("--kind", choices=["hausdorff", "prokhorov", "w2", "ghp", "gh"], required=True)
    sp.add_argument("--space", required=True)
    sp.add_argument("--space2", help="second space for --kind gh")
    sp.add_argument("--mu")
    sp.add_argument("--nu")
    sp.add_argument("--coupling-out")
    sp.set_defaults(func=cmd_distance, input=None)

    sp = sub.add_parser("discretize", help="Voronoi discretization and nerve complex")
    common(sp)
    sp.add_argument("--eps", type=float)
    sp.add_argument("--max-dim", type=int, default=3)
    sp.add_argument("--nerve-out", help="nerve as .json or .off listing")
    sp.set_defaults(func=cmd_discretize)

    sp = sub.add_parser("embed", help="low-distortion embedding of the snowflaked metric")
    common(sp)
    sp.add_argument("--eps", type=float, help="snowflake exponent in (0, 1); 1 embeds the metric itself")
    sp.add_argument("--dim", type=int)
    sp.add_argument("--max-iters", type=int, default=2000)
    sp.add_argument("--restarts", type=int, default=5)
    sp.add_argument("--coords-out")
    sp.set_defaults(func=cmd_embed)

    sp = sub.add_parser("report", help="consolidated diagnostics")
    common(sp)
    sp.add_argument("--eps", type=float)
    sp.add_argument("--K", type=float, default=0.0)
    sp.add_argument("--N", type=float)
    sp.set_defaults(func=cmd_report)
    return p


def _thread_limit():
    n = os.environ.get("MMS_THREADS")
    if not n:
        return None
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=max(1, int(n)))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    limiter = _thread_limit()
    try:
        return args.func(args)
    except SizeGuardError as exc:
        print(f"size guard: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except ValidationError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        rep = getattr(exc, "report", None)
        if rep is not None:
            sys.stdout.write(io.dumps(rep.to_dict()))
        return EXIT_INVALID
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except MMSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    finally:
        if limiter is not None:
            limiter.unregister()


if __name__ == "__main__":
    sys.exit(main())
