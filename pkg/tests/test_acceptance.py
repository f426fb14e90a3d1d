"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]``/``[FAIL]`` line (also collected into
the terminal summary) before asserting.
"""

import math
import time

import numpy as np
import pytest

from conftest import (
    ACCEPTANCE_LINES,
    bisection_scale,
    delaunay_oracle_edges,
    edge_pairs,
    mesh_of,
    planar_delaunay_mesh,
    planar_points,
    random_fan,
)
from intrinsic_simplify import formats, shapes
from intrinsic_simplify.cli import main, poisson_sweep
from intrinsic_simplify.correspondence import (
    conformal_scale,
    conformal_scale_from_lengths,
    project_from_lengths,
    project_removed_vertex,
)
from intrinsic_simplify.flips import FlipLog, flip_edge, flip_to_delaunay, is_flippable, undo_flips
from intrinsic_simplify.simplify import LOWER_BOUND, SimplifyConfig, simplify


def verdict(number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


CORPUS_NAMES = ["plane_grid", "cylinder", "cone", "icosphere", "saddle", "noisy_plane", "torus",
                "pillow", "boundary_strip", "tetrahedron", "sine_surface", "capsule"]


def test_criterion_1_conservation_invariants():
    corpus = shapes.synthetic_corpus()
    assert len(corpus) >= 10 and set(CORPUS_NAMES) <= set(corpus)
    start = time.perf_counter()
    problems = []
    runs = 0
    for name in CORPUS_NAMES:
        for kappa_max in (1e-9, 1e-2, 1.0):
            m = mesh_of(corpus[name])
            chi, loops, total = m.euler_characteristic(), len(m.boundary_loops()), m.curvature_sum()
            simplify(m, SimplifyConfig(kappa_max=kappa_max))
            runs += 1
            if m.euler_characteristic() != chi:
                problems.append(f"{name}@{kappa_max}: chi")
            if not abs(m.curvature_sum() - total) <= 1e-8 * m.n_vertex_slots:
                problems.append(f"{name}@{kappa_max}: curvature sum")
            if len(m.boundary_loops()) != loops:
                problems.append(f"{name}@{kappa_max}: boundary loops")
    elapsed = time.perf_counter() - start
    verdict(1, not problems and elapsed < 60,
            f"{runs} runs, chi / sum kappa (1e-8 V) / boundary loops preserved, {elapsed:.1f}s {problems}")


def test_criterion_2_developable_collapse():
    m = mesh_of(shapes.cylinder(50, 50))
    interior = [v for v in m.vertices() if not m.on_boundary[v]]
    area = m.total_area()
    start = time.perf_counter()
    simplify(m, SimplifyConfig(kappa_max=1e-9))
    elapsed = time.perf_counter() - start
    removed = sum(not m.vertex_alive(v) for v in interior) / len(interior)
    area_err = abs(m.total_area() - area) / area
    verdict(2, removed >= 0.95 and area_err <= 1e-6 and elapsed < 5,
            f"50x50 cylinder: {100 * removed:.2f}% interior removed, area rel err {area_err:.1e}, "
            f"{m.n_vertices} vertices left, {elapsed:.2f}s")


def test_criterion_3_flat_metric_round_trip():
    positions, faces = shapes.plane_grid(40, 40)
    m = mesh_of((positions, faces))
    start = time.perf_counter()
    _, mapping = simplify(m, SimplifyConfig(kappa_max=1e-9))
    elapsed = time.perf_counter() - start
    xy = np.asarray(positions)[:, :2]
    worst = 0.0
    for v, (face, coords) in mapping.items():
        p = np.asarray(coords) @ xy[list(m.face_vertices(face))]
        worst = max(worst, float(np.linalg.norm(p - xy[v])))
    verdict(3, len(mapping) > 0 and worst <= 1e-6 and elapsed < 5,
            f"40x40 grid: {len(mapping)} removed vertices, max position error {worst:.1e}, {elapsed:.2f}s")


def test_criterion_4_flip_oracle_equivalence():
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    # random valid flips against planar coordinates
    worst = 0.0
    flips = 0
    exact_undo = True
    while flips < 1000:
        points = planar_points(60, rng)
        m = planar_delaunay_mesh(points)
        before = m.signature()
        log = FlipLog()
        edges = m.edges()
        for _ in range(500):
            if flips >= 1000 or len(log) >= 100:
                break
            e = edges[int(rng.integers(len(edges)))]
            if not is_flippable(m, e):
                continue
            new = flip_edge(m, e, log)
            a, b = m.edge_vertices(e)
            expected = float(np.linalg.norm(points[a] - points[b]))
            worst = max(worst, abs(new - expected) / expected)
            flips += 1
        undo_flips(m, log)
        exact_undo &= m.signature() == before
    # intrinsic Delaunay of a scrambled planar triangulation equals the planar one
    matches = 0
    for _ in range(50):
        points = planar_points(100, rng)
        m = planar_delaunay_mesh(points)
        for _ in range(300):
            e = m.edges()[int(rng.integers(m.n_edges))]
            if is_flippable(m, e):
                flip_edge(m, e)
        flip_to_delaunay(m)
        matches += edge_pairs(m) == delaunay_oracle_edges(points)
    elapsed = time.perf_counter() - start
    verdict(4, flips == 1000 and worst <= 1e-9 and exact_undo and matches == 50 and elapsed < 30,
            f"{flips} flips max rel err {worst:.1e}, undo bit-exact={exact_undo}, "
            f"Delaunay oracle {matches}/50, {elapsed:.1f}s")


def test_criterion_5_removal_success_rate():
    start = time.perf_counter()
    encountered = removed = 0
    for name in CORPUS_NAMES:
        report, _ = simplify(mesh_of(shapes.synthetic_corpus()[name]), SimplifyConfig(kappa_max=1e-2))
        encountered += report.encountered
        removed += report.removed
    elapsed = time.perf_counter() - start
    rate = removed / encountered
    verdict(5, rate >= 0.90 and elapsed < 120,
            f"kappa_max=1e-2: {removed}/{encountered} = {100 * rate:.2f}% removed, {elapsed:.1f}s")


def _fan_curvature(outer, spokes, coords):
    """Angle defect at the planar point given by ``coords`` in the laid-out triangle."""
    l_jk, l_kl, l_lj = outer
    x = (l_jk ** 2 + l_lj ** 2 - l_kl ** 2) / (2 * l_jk)
    corners = np.array([(0.0, 0.0), (l_jk, 0.0), (x, math.sqrt(max(l_lj ** 2 - x * x, 0.0)))])
    p = np.asarray(coords) @ corners
    angles = 0.0
    for a, b in ((0, 1), (1, 2), (2, 0)):
        u, w = corners[a] - p, corners[b] - p
        angles += math.atan2(abs(u[0] * w[1] - u[1] * w[0]), float(u @ w))
    return 2 * math.pi - angles


def test_criterion_6_conformal_scale():
    start = time.perf_counter()
    m = mesh_of(shapes.tetrahedron())
    s = conformal_scale(m, 0)
    coords = project_removed_vertex(m, 0, s)
    tetra_ok = abs(s - 1 / math.sqrt(3)) <= 1e-9 and np.allclose(coords, 1 / 3, atol=1e-9)

    rng = np.random.default_rng(99)
    worst_scale = worst_kappa = 0.0
    for _ in range(1000):
        outer, spokes, _, _ = random_fan(rng)
        s = conformal_scale_from_lengths(outer, spokes)
        oracle = bisection_scale(outer, spokes)
        worst_scale = max(worst_scale, abs(s - oracle))
        c = project_from_lengths(outer, spokes, s)
        worst_kappa = max(worst_kappa, abs(_fan_curvature(outer, spokes, c)))
    elapsed = time.perf_counter() - start
    verdict(6, tetra_ok and worst_scale <= 1e-9 and worst_kappa <= 1e-9 and elapsed < 10,
            f"tetra s={conformal_scale(m, 0):.12f}, 1000 fans: max |s - bisection| {worst_scale:.1e}, "
            f"max |kappa| {worst_kappa:.1e}, {elapsed:.2f}s")


def test_criterion_7_poisson_trend():
    base = mesh_of(shapes.torus(140, 70))
    reference = base.copy()
    flip_to_delaunay(reference)
    kappa = np.array([abs(reference.gaussian_curvature(v)) for v in reference.vertices()])
    low, high = int(np.argmin(kappa)), int(np.argmax(kappa))
    start = time.perf_counter()
    sweep = [1e-4, 1e-3, 1e-2]
    low_mse = [r["mse"] for r in poisson_sweep(base, low, sweep)]
    high_mse = [r["mse"] for r in poisson_sweep(base, high, sweep)]
    elapsed = time.perf_counter() - start
    monotone = all(a <= b for a, b in zip(low_mse, low_mse[1:]))
    verdict(7, monotone and high_mse[-1] < low_mse[-1] and elapsed < 120,
            f"{base.n_vertices}-vertex torus, low-curvature spike MSE "
            f"{', '.join(f'{x:.2e}' for x in low_mse)}; high-curvature spike MSE at 1e-2 "
            f"{high_mse[-1]:.2e}, {elapsed:.1f}s")


def test_criterion_8_negative_curvature_safety():
    m = mesh_of(shapes.saddle_fan())
    kappa = m.gaussian_curvature(0)
    start = time.perf_counter()
    report, _ = simplify(m, SimplifyConfig(kappa_max=4.0))
    elapsed = time.perf_counter() - start
    reason = report.failed_vertices.get(0)
    verdict(8, kappa <= -math.pi and m.vertex_alive(0) and reason == LOWER_BOUND and elapsed < 10,
            f"saddle kappa={kappa:.3f}, centre kept, reason={reason!r}, {elapsed:.2f}s")


def _surviving_lengths_exact(m, kappa_max=1e-12):
    before = {e: (frozenset(m.edge_vertices(e)), m.length[e]) for e in m.edges()}
    simplify(m, SimplifyConfig(kappa_max=kappa_max))
    surviving = [e for e in m.edges() if e in before and frozenset(m.edge_vertices(e)) == before[e][0]]
    changed = sum(m.length[e] != before[e][1] for e in surviving)
    return surviving, changed


def test_criterion_9_zero_curvature_exactness():
    cyl, cyl_changed = _surviving_lengths_exact(mesh_of(shapes.cylinder(50, 50)))
    # capsule: flat sides are removed, curved caps keep many edges
    cap, cap_changed = _surviving_lengths_exact(mesh_of(shapes.capsule(24, 12, 6)))
    verdict(9, cyl and cap and cyl_changed == 0 and cap_changed == 0,
            f"cylinder {len(cyl)} surviving edges, capsule {len(cap)}; lengths changed: "
            f"{cyl_changed + cap_changed}")


@pytest.mark.slow
def test_criterion_10_timing_split(tmp_path):
    corpus = tmp_path / "large"
    corpus.mkdir()
    formats.write_obj(corpus / "capsule50k.obj", *shapes.capsule(200, 200, 25))
    out = tmp_path / "stats.csv"
    assert main(["stats", str(corpus), "--kappa-max", "1e-2", "-o", str(out)]) == 0
    row = formats.read_stats_csv(out)[0]
    remove, track, total = (float(row[k]) for k in ("remove_time", "track_time", "total_time"))
    share = track / total
    verdict(10, track > 0 and abs(remove + track - total) <= 1e-6 * total,
            f"{row['vertices_before']}-vertex tracked run: remove {remove:.1f}s, track {track:.1f}s, "
            f"total {total:.1f}s, track share {100 * share:.0f}% (informational)")
