import math

import numpy as np
import pytest
from scipy.spatial import Delaunay

from intrinsic_simplify.mesh import IntrinsicMesh, build_from_extrinsic


def mesh_of(shape):
    positions, faces = shape
    return build_from_extrinsic(positions, faces)


def planar_points(n, rng):
    return rng.uniform(0.0, 1.0, size=(n, 2))


def planar_delaunay_mesh(points):
    """Mesh of the planar Delaunay triangulation, faces made counter-clockwise."""
    tri = Delaunay(points)
    faces = []
    for a, b, c in tri.simplices:
        pa, pb, pc = points[a], points[b], points[c]
        cross = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pb[1] - pa[1]) * (pc[0] - pa[0])
        faces.append((a, b, c) if cross > 0 else (a, c, b))
    positions = [(float(x), float(y), 0.0) for x, y in points]
    return build_from_extrinsic(positions, faces)


def edge_pairs(mesh):
    return {frozenset(mesh.edge_vertices(e)) for e in mesh.edges()}


def flat_torus():
    """One-vertex flat torus: two triangles, three self-edges."""
    faces = [(0, 0, 0), (0, 0, 0)]
    twins = [[(1, 1), (1, 2), (1, 0)], [(0, 2), (0, 0), (0, 1)]]
    d = math.sqrt(2.0)
    lengths = [[1.0, 1.0, d], [d, 1.0, 1.0]]
    return IntrinsicMesh.from_face_tables(1, faces, twins, lengths)


def hexagon_fan(radius=1.0):
    """Regular hexagon of six equilateral triangles around vertex 0."""
    positions = [(0.0, 0.0, 0.0)]
    for i in range(6):
        t = math.pi * i / 3.0
        positions.append((radius * math.cos(t), radius * math.sin(t), 0.0))
    faces = [(0, 1 + i, 1 + (i + 1) % 6) for i in range(6)]
    return positions, faces


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def delaunay_oracle_edges(points, chunk=40000):
    """Edges of every triangle whose circumcircle contains no other point.

    Brute force over all vertex triples; assumes general position.
    """
    from itertools import combinations

    pts = np.asarray(points, dtype=float)
    triples = np.array(list(combinations(range(len(pts)), 3)), dtype=np.int64)
    sq = (pts * pts).sum(axis=1)
    edges = set()
    for start in range(0, len(triples), chunk):
        t = triples[start:start + chunk]
        a, b, c = pts[t[:, 0]], pts[t[:, 1]], pts[t[:, 2]]
        d = 2 * (a[:, 0] * (b[:, 1] - c[:, 1]) + b[:, 0] * (c[:, 1] - a[:, 1]) + c[:, 0] * (a[:, 1] - b[:, 1]))
        ok = np.abs(d) > 1e-14
        t, a, b, c, d = t[ok], a[ok], b[ok], c[ok], d[ok]
        sa, sb, sc = sq[t[:, 0]], sq[t[:, 1]], sq[t[:, 2]]
        centre = np.column_stack([
            (sa * (b[:, 1] - c[:, 1]) + sb * (c[:, 1] - a[:, 1]) + sc * (a[:, 1] - b[:, 1])) / d,
            (sa * (c[:, 0] - b[:, 0]) + sb * (a[:, 0] - c[:, 0]) + sc * (b[:, 0] - a[:, 0])) / d,
        ])
        r2 = ((a - centre) ** 2).sum(axis=1)
        # squared distance of every point to every circumcentre
        dist = sq[None, :] - 2 * centre @ pts.T + (centre * centre).sum(axis=1)[:, None]
        inside = dist < r2[:, None] * (1 - 1e-9)
        for i, j, k in t[~inside.any(axis=1)]:
            edges.update((frozenset((i, j)), frozenset((j, k)), frozenset((k, i))))
    return edges


def random_flips(mesh, count, rng, log=None, mapping=None):
    """Apply ``count`` random valid flips; returns the flipped edge ids."""
    from intrinsic_simplify.flips import flip_edge, is_flippable

    done = []
    edges = mesh.edges()
    attempts = 0
    while len(done) < count and attempts < 100 * count:
        attempts += 1
        e = edges[int(rng.integers(len(edges)))]
        if is_flippable(mesh, e):
            flip_edge(mesh, e, log, mapping)
            done.append(e)
    return done


def bisection_scale(outer, spokes, iterations=200):
    """Monotone root find of the fan angle sum = 2pi over the valid scale interval.

    Returns None when no valid interval or no sign change exists.
    """
    l_jk, l_kl, l_lj = outer
    p, q, r = spokes
    lo, hi = 0.0, math.inf
    for a, b, c in ((p, q, l_jk), (q, r, l_kl), (r, p, l_lj)):
        # s*a + s*b > c, |s*a - s*b| < c
        lo = max(lo, c / (a + b))
        if a != b:
            hi = min(hi, c / abs(a - b))
    if not lo < hi:
        return None

    def total(s):
        angles = 0.0
        for a, b, c in ((p, q, l_jk), (q, r, l_kl), (r, p, l_lj)):
            x = (s * s * a * a + s * s * b * b - c * c) / (2 * s * s * a * b)
            angles += math.acos(min(1.0, max(-1.0, x)))
        return angles - 2 * math.pi

    if math.isinf(hi):
        hi = lo * 2
        while total(hi) > 0:
            hi *= 2
    if not (total(lo) > 0 > total(hi)):
        return None
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if total(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * hi:
            break
    return 0.5 * (lo + hi)


def random_fan(rng):
    """Valid valence-3 fan with a known flattening scale.

    A point is drawn inside a random planar triangle and its distances to
    the corners are divided by a random scale ``s0``; the fan is kept only
    if its three triangles are proper at unit scale.
    Returns ``(outer, spokes, s0, weights)``.
    """
    while True:
        j, k, l = rng.uniform(-1, 1, size=(3, 2))
        cross = (k[0] - j[0]) * (l[1] - j[1]) - (k[1] - j[1]) * (l[0] - j[0])
        if abs(cross) < 0.2:
            continue
        w = rng.dirichlet((2.0, 2.0, 2.0))
        x = w[0] * j + w[1] * k + w[2] * l
        s0 = float(np.exp(rng.uniform(np.log(0.4), np.log(2.5))))
        outer = tuple(float(np.linalg.norm(a - b)) for a, b in ((j, k), (k, l), (l, j)))
        spokes = tuple(float(np.linalg.norm(x - c)) / s0 for c in (j, k, l))
        p, q, r = spokes
        fan = ((p, q, outer[0]), (q, r, outer[1]), (r, p, outer[2]))
        if all(a + b > 1.001 * c and b + c > 1.001 * a and c + a > 1.001 * b for a, b, c in fan):
            return outer, spokes, s0, tuple(float(t) for t in w)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
