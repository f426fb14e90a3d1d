"""Command line interface: ``intrinsic-simplify <command> ...``."""

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import formats
from .flips import flip_to_delaunay
from .mesh import MeshError, build_from_extrinsic
from .poisson import PoissonProblem, SolverError, interpolate_at_removed, mse_against_original, poisson_solve
from .simplify import SimplifyConfig, simplify

log = logging.getLogger("intrinsic_simplify")


def _config(args, kappa_max, **extra):
    return SimplifyConfig(
        kappa_max=kappa_max,
        track_mappings=not args.no_track,
        initial_delaunay=not args.no_initial_delaunay,
        seed=args.seed,
        **extra,
    )


def _report_dict(report):
    out = {k: v for k, v in vars(report).items() if k not in ("failures", "failed_vertices")}
    out["failures"] = dict(report.failures)
    out["removable_pct"] = report.removable_pct
    out["removed_pct"] = report.removed_pct
    return out


def cmd_simplify(args):
    positions, faces = formats.load_obj(args.input)
    mesh = build_from_extrinsic(positions, faces)
    report, mapping = simplify(mesh, _config(args, args.kappa_max))
    prefix = Path(args.output) if args.output else Path(args.input).with_suffix("")
    prefix.parent.mkdir(parents=True, exist_ok=True)
    paths = formats.save_result(prefix, mesh, mapping)
    report_path = prefix.with_suffix(".json")
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(_report_dict(report), fh, indent=2)
    formats.write_stats_csv(sys.stdout, [formats.stats_row(Path(args.input).stem, report)])
    for p in [*paths, report_path]:
        log.info("wrote %s", p)
    return 0


def _stats_task(path, kappas, track, initial_delaunay, seed):
    """Simplify one corpus mesh at every threshold; returns rows or an error."""
    name = Path(path).stem
    try:
        positions, faces = formats.load_obj(path)
        base = build_from_extrinsic(positions, faces)
    except (OSError, ValueError) as exc:
        return name, [], str(exc)
    rows = []
    for kappa in kappas:
        mesh = base.copy()
        config = SimplifyConfig(kappa, track_mappings=track, initial_delaunay=initial_delaunay, seed=seed)
        try:
            report, _ = simplify(mesh, config)
        except Exception as exc:  # noqa: BLE001 - one bad mesh must not stop the corpus
            return name, rows, f"kappa_max={kappa}: {exc}"
        rows.append(formats.stats_row(name, report))
    return name, rows, None


def cmd_stats(args):
    paths = sorted(Path(args.corpus).glob("*.obj"))
    task = (args.kappa_max, not args.no_track, not args.no_initial_delaunay, args.seed)
    if args.threads > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=args.threads) as pool:
            results = list(pool.map(_stats_task, paths, *([x] * len(paths) for x in task)))
    else:
        results = [_stats_task(p, *task) for p in paths]
    rows = []
    for name, mesh_rows, error in results:
        if error is not None:
            log.warning("skipping %s: %s", name, error)
        rows.extend(mesh_rows)
    rows.sort(key=lambda r: (r["mesh"], float(r["kappa_max"])))
    if args.output:
        formats.write_stats_csv(args.output, rows)
    else:
        formats.write_stats_csv(sys.stdout, rows)
    return 0


def project(mesh, mapping, positions):
    """Surviving vertices at their original positions, removed ones by barycentrics.

    Returns an array over all original vertex ids. Removed vertices are placed
    at the barycentric combination of their host corners' original
    positions, an approximation of where they sit on the intrinsic surface.
    """
    positions = np.asarray(positions, dtype=float)
    out = np.array(positions, copy=True)
    for v, point in mapping.items():
        if v >= len(positions):
            raise MeshError(f"mapped vertex {v} is not in the original mesh")
        corners = mesh.face_vertices(point.face)
        out[v] = np.asarray(point.coords) @ positions[list(corners)]
    return out


def cmd_project(args):
    mesh = formats.load_itm(args.mesh)
    mapping = formats.load_map(args.mapping, mesh)
    positions, _ = formats.load_obj(args.original)
    if mesh.n_vertex_slots > len(positions):
        raise MeshError(
            f"mesh has {mesh.n_vertex_slots} vertex ids but the original has {len(positions)} positions"
        )
    points = project(mesh, mapping, positions)
    faces = [mesh.face_vertices(f) for f in mesh.faces()]
    formats.write_obj(args.output, points, faces)
    log.info("wrote %s", args.output)
    return 0


def poisson_sweep(base, source, kappas, track=True, initial_delaunay=True, seed=None, field_dir=None):
    """MSE of the simplified-mesh spike solution for each threshold.

    The reference solution is computed on the intrinsic Delaunay
    triangulation of ``base``; ``source`` is never removed. With
    ``field_dir``, the reference and each interpolated solution are written
    as field files there.
    """
    reference = base.copy()
    flip_to_delaunay(reference)
    problem = PoissonProblem(source)
    u0 = poisson_solve(reference, problem)
    if field_dir is not None:
        field_dir = Path(field_dir)
        field_dir.mkdir(parents=True, exist_ok=True)
        formats.write_field(field_dir / "reference.field", u0)
    rows = []
    for kappa in kappas:
        mesh = base.copy()
        config = SimplifyConfig(kappa, initial_delaunay=initial_delaunay, seed=seed,
                                protected={source}, track_mappings=True)
        report, mapping = simplify(mesh, config)
        row = {"kappa_max": kappa, "vertices_after": mesh.n_vertices, "mse": None, "error": ""}
        try:
            u = poisson_solve(mesh, problem)
            values = interpolate_at_removed(mapping, mesh, u)
            row["mse"] = mse_against_original(u0, u, values)
            if field_dir is not None:
                full = np.full(len(u0), np.nan)
                full[:len(u)] = u[:len(u0)]
                for v, value in values.items():
                    full[v] = value
                formats.write_field(field_dir / f"kappa_{kappa!r}.field", full)
        except SolverError as exc:
            row["error"] = str(exc)
        rows.append(row)
    return rows


def cmd_poisson(args):
    positions, faces = formats.load_obj(args.input)
    base = build_from_extrinsic(positions, faces)
    rows = poisson_sweep(base, args.source, args.kappa_max, initial_delaunay=not args.no_initial_delaunay,
                         seed=args.seed, field_dir=args.fields)
    fh = open(args.output, "w", newline="", encoding="utf-8") if args.output else sys.stdout
    try:
        writer = csv.DictWriter(fh, fieldnames=("kappa_max", "vertices_after", "mse", "error"))
        writer.writeheader()
        for row in rows:
            writer.writerow({**row, "kappa_max": repr(row["kappa_max"]),
                             "mse": "" if row["mse"] is None else repr(row["mse"])})
    finally:
        if args.output:
            fh.close()
    return 1 if any(row["error"] for row in rows) else 0


def _add_common(p, multi=False):
    if multi:
        p.add_argument("--kappa-max", type=float, nargs="+", default=[1e-9, 1e-2, 1.0],
                       help="curvature thresholds in radians")
    else:
        p.add_argument("--kappa-max", type=float, default=1e-9, help="curvature threshold in radians")
    p.add_argument("--no-track", action="store_true", help="do not track removed vertices")
    p.add_argument("--no-initial-delaunay", action="store_true",
                   help="skip the initial intrinsic Delaunay retriangulation")
    p.add_argument("--seed", type=int, default=None, help="seed for breaking curvature ties")


def build_parser():
    parser = argparse.ArgumentParser(prog="intrinsic-simplify", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simplify", help="simplify one OBJ and write .itm, .map and .json")
    p.add_argument("input")
    p.add_argument("-o", "--output", help="output prefix (default: input without extension)")
    _add_common(p)
    p.set_defaults(func=cmd_simplify)

    p = sub.add_parser("stats", help="simplification statistics for a directory of OBJ files")
    p.add_argument("corpus")
    p.add_argument("-o", "--output", help="CSV path (default: stdout)")
    p.add_argument("--threads", type=int, default=1, help="worker processes")
    _add_common(p, multi=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("project", help="export removed vertices projected onto the original mesh")
    p.add_argument("mesh")
    p.add_argument("mapping")
    p.add_argument("original")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("poisson", help="Poisson spike MSE against the original mesh per threshold")
    p.add_argument("input")
    p.add_argument("--source", type=int, required=True, help="spike vertex id (0-based)")
    p.add_argument("-o", "--output", help="CSV path (default: stdout)")
    p.add_argument("--fields", help="directory for reference and interpolated field files")
    _add_common(p, multi=True)
    p.set_defaults(func=cmd_poisson)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
