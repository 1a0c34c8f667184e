"""Command-line front-end: reproducible attractors, dimension estimates,
interpolation, rendering, and the verification battery.

Exit codes: 0 success, 1 a verification check failed, 2 usage/contract
errors, 3 capacity or numeric errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .cloud import PointCloud
from .condensation import (
    CondensedIfs,
    CondensedProductIfs,
    decomposition_check,
    inhomogeneous_attractor,
    product_inhomogeneous_attractor,
    verify_product_inhomogeneous,
)
from .dimension import AxisBox, box_dimension_estimate, moran_solve, osc_check_boxes, osc_check_product
from .errors import (
    CapacityError,
    ContractError,
    NumericError,
    StructuralError,
    UnsupportedConfigurationError,
)
from .fif import build_fif_maps, fif_fixed_point, product_fif
from .ifs import IfsSystem, ProductIfs, attractor, chaos_game, product_attractor_direct
from .io import (
    load_ifs,
    read_cloud_csv,
    read_knots_csv,
    write_cloud_csv,
    write_estimate_json,
    write_sampled_function_csv,
)
from .render import Viewport, render, save_cloud_figure, save_function_figure, save_loglog_figure, viewport_for
from .verify import SUITES, verify_all


def _floats(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise StructuralError(f"expected comma-separated numbers, got {text!r}") from exc


def _parse_viewport(text: str) -> Viewport:
    vals = _floats(text)
    if len(vals) != 4:
        raise StructuralError("viewport must be xmin,xmax,ymin,ymax")
    return Viewport(*vals)


def _parse_boxes(text: str) -> list[AxisBox]:
    boxes = []
    for part in text.split(";"):
        vals = _floats(part)
        if len(vals) % 2 != 0 or len(vals) == 0:
            raise StructuralError(
                "each box needs an even count of numbers: lo_1..lo_d,hi_1..hi_d"
            )
        d = len(vals) // 2
        boxes.append(AxisBox(np.array(vals[:d]), np.array(vals[d:])))
    return boxes


def _require_positive(value: float, name: str) -> float:
    if value is None or not value > 0:
        raise StructuralError(f"--{name} must be positive")
    return value


def _cmd_attractor(args) -> int:
    system = load_ifs(args.ifs)
    tol = _require_positive(args.tol, "tol")
    if isinstance(system, (CondensedIfs, CondensedProductIfs)):
        raise StructuralError(
            "this definition has a condensation set; use the 'inhomogeneous' subcommand"
        )
    if isinstance(system, ProductIfs):
        cloud = product_attractor_direct(
            system, tol=tol, snap=args.snap, max_points=args.max_points
        )
    elif args.chaos:
        cloud = chaos_game(system, n_points=args.chaos, rng_seed=args.seed)
    else:
        cloud = attractor(system, tol=tol, snap=args.snap, max_points=args.max_points)
    if args.out:
        write_cloud_csv(cloud, args.out)
        print(f"wrote {len(cloud)} points (resolution {cloud.resolution:.3g}) to {args.out}")
    if args.render:
        vp = _parse_viewport(args.viewport) if args.viewport else viewport_for(cloud)
        if cloud.dim == 1:
            pts = np.column_stack([cloud.points[:, 0], np.zeros(len(cloud))])
            cloud2 = PointCloud(pts, resolution=cloud.resolution)
            render(cloud2, vp, args.width, args.height, args.render)
        else:
            render(cloud, vp, args.width, args.height, args.render)
        print(f"rendered {args.render}")
    if args.plot:
        save_cloud_figure(cloud, args.plot)
        print(f"plotted {args.plot}")
    return 0


def _cmd_inhomogeneous(args) -> int:
    system = load_ifs(args.ifs)
    tol = _require_positive(args.tol, "tol")
    if isinstance(system, CondensedProductIfs):
        cloud = product_inhomogeneous_attractor(
            system, tol=tol, snap=args.snap, max_points=args.max_points
        )
        if args.out:
            write_cloud_csv(cloud, args.out)
            print(f"wrote {len(cloud)} points to {args.out}")
        if args.plot:
            save_cloud_figure(cloud, args.plot)
        if args.check_decomposition:
            rep = verify_product_inhomogeneous(
                system, tol=tol, snap=args.snap, max_points=args.max_points
            )
            print(
                f"product factorization: distance {rep.distance:.6g} "
                f"bound {rep.bound:.6g} -> {'ok' if rep.ok else 'FAIL'}"
            )
            return 0 if rep.ok else 1
        return 0
    if not isinstance(system, CondensedIfs):
        raise StructuralError("definition has no condensation set; use 'attractor'")
    cloud = inhomogeneous_attractor(
        system, tol=tol, snap=args.snap, max_points=args.max_points
    )
    if args.out:
        write_cloud_csv(cloud, args.out)
        print(f"wrote {len(cloud)} points to {args.out}")
    if args.plot:
        save_cloud_figure(cloud, args.plot)
    if args.check_decomposition:
        rep = decomposition_check(
            system, depth=args.depth, tol=tol, snap=args.snap, max_points=args.max_points
        )
        print(
            f"decomposition: distance {rep.distance:.6g} bound {rep.bound:.6g} "
            f"(truncation {rep.truncation_bound:.3g}) -> {'ok' if rep.ok else 'FAIL'}"
        )
        return 0 if rep.ok else 1
    return 0


def _cmd_dimension(args) -> int:
    cloud = read_cloud_csv(args.cloud)
    est = box_dimension_estimate(cloud, args.rmin, args.rmax, args.scales)
    if args.out:
        write_estimate_json(est, args.out)
    if args.plot:
        save_loglog_figure(est, args.plot)
    print(f"slope {est.slope:.6f}  r_squared {est.r_squared:.6f}")
    return 0


def _cmd_moran(args) -> int:
    sol = moran_solve(_floats(args.ratios))
    if args.format == "json" or (args.out and str(args.out).endswith(".json")):
        payload = json.dumps(
            {"s": sol.s, "ratios": list(sol.ratios), "residual": sol.residual}
        )
        if args.out:
            Path(args.out).write_text(payload + "\n")
        else:
            print(payload)
    else:
        print(f"{sol.s:.12f}")
        if args.out:
            Path(args.out).write_text(f"s,residual\n{sol.s!r},{sol.residual!r}\n")
    return 0


def _cmd_osc(args) -> int:
    system = load_ifs(args.ifs)
    boxes = _parse_boxes(args.box)
    if isinstance(system, ProductIfs):
        rep = osc_check_product(system, boxes)
        verdict = "holds" if rep.holds else "fails for this candidate"
        print(f"product OSC {verdict}; factors: "
              + ", ".join("holds" if r.holds else "no" for r in rep.factor_reports))
        if rep.witness:
            print(f"overlapping tuples: {rep.witness[0]} and {rep.witness[1]}")
        return 0 if rep.holds else 1
    if isinstance(system, (CondensedIfs, CondensedProductIfs)):
        raise StructuralError("OSC checking applies to homogeneous systems")
    if len(boxes) != 1:
        raise StructuralError("single systems take exactly one candidate box")
    rep = osc_check_boxes(system, boxes[0])
    verdict = "holds" if rep.holds else "fails for this candidate"
    print(f"OSC {verdict}; margin {rep.margin:.6g}, containment slack {rep.containment_slack:.6g}")
    return 0 if rep.holds else 1


def _cmd_fif(args) -> int:
    data = read_knots_csv(args.data)
    alphas = _floats(args.alpha)
    maps = build_fif_maps(data, alphas)
    g = fif_fixed_point(maps, grid_size=args.grid, tol=_require_positive(args.tol, "tol"))
    if args.out:
        write_sampled_function_csv(g, args.out)
        print(f"wrote {g.values.shape[0]} samples to {args.out}")
    if args.plot:
        save_function_figure(g, args.plot, knots=data)
        print(f"plotted {args.plot}")
    return 0


def _cmd_pfif(args) -> int:
    job = json.loads(Path(args.job).read_text())
    factors = job.get("factors")
    if not isinstance(factors, list) or not factors:
        raise StructuralError("job file needs a nonempty 'factors' list")
    base = Path(args.job).parent
    per_factor = []
    for f in factors:
        data = read_knots_csv(base / f["data"])
        per_factor.append((data, [float(a) for a in f["alphas"]]))
    grid = int(job.get("grid", args.grid))
    tol = float(job.get("tol", args.tol))
    pf = product_fif(per_factor, grid_size=grid, tol=_require_positive(tol, "tol"))
    lattice = int(job.get("lattice", args.lattice))
    coords = [np.linspace(g.x0, g.x1, lattice) for g in pf.factors]
    values = pf.evaluate(coords)
    mesh = np.meshgrid(*coords, indexing="ij")
    cols = [m.ravel() for m in mesh]
    vals = np.meshgrid(*values, indexing="ij")
    cols += [v.ravel() for v in vals]
    m = pf.factor_count
    header = ",".join([f"x{k + 1}" for k in range(m)] + [f"g{k + 1}" for k in range(m)])
    out = Path(args.out)
    with out.open("w") as fh:
        fh.write(f"# {header}\n")
        np.savetxt(fh, np.column_stack(cols), delimiter=",", fmt="%.17g")
    print(f"wrote {lattice ** m} lattice rows to {out}")
    if args.plot:
        save_function_figure(pf.factors[0], args.plot)
    return 0


def _cmd_render(args) -> int:
    cloud = read_cloud_csv(args.cloud)
    vp = _parse_viewport(args.viewport) if args.viewport else viewport_for(cloud)
    axes = tuple(int(a) for a in args.axes.split(",")) if args.axes else (0, 1)
    if len(axes) != 2:
        raise StructuralError("--axes needs exactly two indices")
    if cloud.dim == 1:
        pts = np.column_stack([cloud.points[:, 0], np.zeros(len(cloud))])
        cloud = PointCloud(pts, resolution=cloud.resolution)
    render(cloud, vp, args.width, args.height, args.out, axes=axes)
    print(f"rendered {args.out}")
    return 0


def _verify_figures(fig_dir: Path) -> list[Path]:
    """Battery figures written alongside the delimited report."""
    from . import systems
    from .fif import InterpolationData

    fig_dir.mkdir(parents=True, exist_ok=True)
    written = []

    cloud = product_attractor_direct(systems.cantor_square(), tol=3.0 ** -6)
    p = fig_dir / "cantor_square.png"
    save_cloud_figure(cloud, p, title="cantor x cantor attractor")
    written.append(p)

    cloud = product_attractor_direct(
        systems.interval_times_sparse(), tol=6.0 ** -4, snap=6.0 ** -4 / 4
    )
    p = fig_dir / "interval_times_sparse.png"
    save_cloud_figure(cloud, p, title="interval x sparse-triple attractor")
    written.append(p)

    band = product_inhomogeneous_attractor(
        CondensedProductIfs(
            (systems.cantor_band_condensed(), systems.cantor_band_condensed())
        ),
        tol=3.0 ** -5,
        snap=3.0 ** -5 / 4,
    )
    p = fig_dir / "cantor_band_product.png"
    save_cloud_figure(band, p, title="inhomogeneous product attractor")
    written.append(p)

    cantor_cloud = attractor(
        systems.cantor_thirds(), seed=PointCloud(np.array([[0.0]])), tol=3.0 ** -10
    )
    est = box_dimension_estimate(cantor_cloud, r_min=3.0 ** -6, r_max=3.0 ** -2, n_scales=5)
    p = fig_dir / "cantor_boxdim.png"
    save_loglog_figure(est, p, title="cantor box-counting fit")
    written.append(p)

    data = InterpolationData(np.array([0.0, 0.5, 1.0]), np.array([0.0, 1.0, 0.0]))
    g = fif_fixed_point(build_fif_maps(data, [0.5, -0.5]), grid_size=2 ** 12, tol=1e-8)
    p = fig_dir / "fif_tent.png"
    save_function_figure(g, p, knots=data, title="fractal interpolant")
    written.append(p)
    return written


def _cmd_verify(args) -> int:
    reports = verify_all(only=args.only)
    for rep in reports:
        print(rep.line())
    failed = [r for r in reports if r.status == "fail"]
    if args.out:
        out = Path(args.out)
        with out.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["name", "statement", "status", "bound", "measured"])
            for rep in reports:
                measured = ";".join(f"{k}={v!r}" for k, v in rep.measured.items())
                writer.writerow(
                    [rep.name, rep.anchor, rep.status,
                     "" if rep.bound is None else repr(rep.bound), measured]
                )
        print(f"report written to {out}")
        if not args.no_figures:
            fig_dir = Path(args.figures) if args.figures else out.parent / (out.stem + "_figures")
            for p in _verify_figures(fig_dir):
                print(f"figure written to {p}")
    print(f"{len(reports) - len(failed)}/{len(reports)} checks passed")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fractal",
        description="Attractors of (product) iterated function systems, "
        "fractal dimensions, and fractal interpolation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-4, help="certified tolerance")
    common.add_argument("--seed", type=int, default=0, help="rng seed")
    common.add_argument("--out", type=str, default=None, help="output path")
    common.add_argument("--format", choices=["csv", "json"], default="csv")

    p = sub.add_parser("attractor", parents=[common], help="deterministic attractor")
    p.add_argument("--ifs", required=True, help="IFS definition JSON")
    p.add_argument("--snap", type=float, default=None, help="grid-snap dedup width")
    p.add_argument("--max-points", type=int, default=5_000_000)
    p.add_argument("--chaos", type=int, default=None, help="random orbit of N points instead")
    p.add_argument("--render", type=str, default=None, help="write a P6 PPM image")
    p.add_argument("--width", type=int, default=512)
    p.add_argument("--height", type=int, default=512)
    p.add_argument("--viewport", type=str, default=None, help="xmin,xmax,ymin,ymax")
    p.add_argument("--plot", type=str, default=None, help="write a matplotlib figure")
    p.set_defaults(func=_cmd_attractor)

    p = sub.add_parser("inhomogeneous", parents=[common], help="attractor with condensation")
    p.add_argument("--ifs", required=True)
    p.add_argument("--depth", type=int, default=8, help="orbital truncation depth")
    p.add_argument("--snap", type=float, default=None)
    p.add_argument("--max-points", type=int, default=5_000_000)
    p.add_argument("--check-decomposition", action="store_true")
    p.add_argument("--plot", type=str, default=None)
    p.set_defaults(func=_cmd_inhomogeneous)

    p = sub.add_parser("dimension", parents=[common], help="box-counting estimate")
    p.add_argument("--cloud", required=True, help="point cloud CSV")
    p.add_argument("--rmin", type=float, required=True)
    p.add_argument("--rmax", type=float, required=True)
    p.add_argument("--scales", type=int, default=8)
    p.add_argument("--plot", type=str, default=None, help="write the log-log fit figure")
    p.set_defaults(func=_cmd_dimension)

    p = sub.add_parser("moran", parents=[common], help="similarity dimension root")
    p.add_argument("--ratios", required=True, help="comma-separated contraction ratios")
    p.set_defaults(func=_cmd_moran)

    p = sub.add_parser("osc", parents=[common], help="open-set-condition check")
    p.add_argument("--ifs", required=True)
    p.add_argument("--box", required=True,
                   help="candidate box lo..,hi.. (';' separates product factors)")
    p.set_defaults(func=_cmd_osc)

    p = sub.add_parser("fif", parents=[common], help="fractal interpolation function")
    p.add_argument("--data", required=True, help="knot CSV with columns x,y")
    p.add_argument("--alpha", required=True, help="comma-separated vertical scalings")
    p.add_argument("--grid", type=int, default=4096)
    p.add_argument("--plot", type=str, default=None)
    p.set_defaults(func=_cmd_fif)

    p = sub.add_parser("pfif", parents=[common], help="product fractal interpolation")
    p.add_argument("--job", required=True, help="job JSON")
    p.add_argument("--grid", type=int, default=4096)
    p.add_argument("--lattice", type=int, default=33, help="output lattice per factor")
    p.add_argument("--plot", type=str, default=None)
    p.set_defaults(func=_cmd_pfif)

    p = sub.add_parser("render", parents=[common], help="rasterize a cloud to PPM")
    p.add_argument("--cloud", required=True)
    p.add_argument("--width", type=int, default=512)
    p.add_argument("--height", type=int, default=512)
    p.add_argument("--viewport", type=str, default=None)
    p.add_argument("--axes", type=str, default=None, help="projection pair, e.g. 0,1")
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("verify", parents=[common], help="run the verification battery")
    p.add_argument("--only", type=str, default=None, choices=sorted(SUITES))
    p.add_argument("--figures", type=str, default=None, help="figure output directory")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 2
        return 0 if code == 0 else 2
    try:
        return args.func(args)
    except (StructuralError, ContractError, UnsupportedConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CapacityError, NumericError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
