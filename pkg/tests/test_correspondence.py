import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import bisection_scale, mesh_of, planar_delaunay_mesh, planar_points, random_fan, random_flips
from intrinsic_simplify import shapes
from intrinsic_simplify.correspondence import (
    BarycentricMapping,
    ProjectionError,
    conformal_scale,
    conformal_scale_from_lengths,
    project_from_lengths,
    project_removed_vertex,
    substitute_dependent,
)
from intrinsic_simplify.flips import FlipLog, flip_edge, undo_flips
from intrinsic_simplify.mesh import build_from_extrinsic
from intrinsic_simplify.simplify import SimplifyConfig, simplify


def test_flat_vertex_needs_no_scale():
    outer = (1.0, 1.0, 1.0)
    spokes = (1 / math.sqrt(3),) * 3
    assert conformal_scale_from_lengths(outer, spokes) == 1.0


def test_tetrahedron_apex():
    m = mesh_of(shapes.tetrahedron())
    s = conformal_scale(m, 0)
    assert s == pytest.approx(1 / math.sqrt(3), abs=1e-9)
    assert bisection_scale((1, 1, 1), (1, 1, 1)) == pytest.approx(1 / math.sqrt(3), abs=1e-12)
    coords = project_removed_vertex(m, 0, s)
    assert np.allclose(coords, (1 / 3, 1 / 3, 1 / 3), atol=1e-9)


def test_no_valid_scale():
    outer, spokes = (1.0, 1.0, 1.0), (1.0, 1.0, 10.0)
    assert bisection_scale(outer, spokes) is None
    with pytest.raises(ProjectionError):
        conformal_scale_from_lengths(outer, spokes)


def test_flat_vertex_on_an_outer_side():
    side = math.hypot(1.0, 1.5)
    outer, spokes = (2.0, side, side), (1.0, 1.0, 1.5)
    s = conformal_scale_from_lengths(outer, spokes)
    assert s == 1.0
    assert np.allclose(project_from_lengths(outer, spokes, s), (0.5, 0.5, 0.0), atol=1e-9)


def test_projection_sums_to_one(rng):
    for _ in range(50):
        outer, spokes, _, weights = random_fan(rng)
        c = project_from_lengths(outer, spokes, conformal_scale_from_lengths(outer, spokes))
        assert sum(c) == pytest.approx(1.0, abs=1e-15) and min(c) >= 0.0
        assert np.allclose(c, weights, atol=1e-8)


def test_closed_form_matches_bisection(rng):
    for _ in range(200):
        outer, spokes, s0, _ = random_fan(rng)
        expected = bisection_scale(outer, spokes)
        assert expected == pytest.approx(s0, rel=1e-9)
        assert conformal_scale_from_lengths(outer, spokes) == pytest.approx(expected, rel=1e-9)


def test_substitute_dependent_examples():
    got = substitute_dependent((0.5, 0.25, 0.25), (1 / 3, 1 / 3, 1 / 3))
    assert np.allclose(got, (0.25 + 0.5 / 3, 0.25 + 0.5 / 3, 0.5 / 3), atol=1e-15)
    assert substitute_dependent((0.0, 0.3, 0.7), (0.2, 0.3, 0.5)) == (0.3, 0.7, 0.0)
    assert substitute_dependent((1.0, 0.0, 0.0), (0.2, 0.3, 0.5)) == (0.2, 0.3, 0.5)


def square_with_point(coords):
    m = build_from_extrinsic([(0, 0, 0), (1, 1, 0), (0, 1, 0), (1, 0, 0)], [(0, 1, 2), (0, 3, 1)])
    mapping = BarycentricMapping()
    mapping.place(99, 0, coords)
    return m, mapping


def test_point_on_flipped_diagonal():
    # midpoint of the diagonal from (0, 0) to (1, 1)
    m, mapping = square_with_point((0.5, 0.5, 0.0))
    e = next(e for e in m.edges() if set(m.edge_vertices(e)) == {0, 1})
    flip_edge(m, e, mapping=mapping)
    face, coords = mapping[99]
    corners = np.array([m.face_vertices(face)]).ravel()
    positions = np.array([(0, 0), (1, 1), (0, 1), (1, 0)], dtype=float)
    assert sum(coords) == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(np.asarray(coords) @ positions[corners], (0.5, 0.5), atol=1e-12)
    assert face == min(m.faces())  # on the new diagonal, the lower face id wins
    mapping.check(m)


def test_flip_outside_quad_leaves_point_alone():
    m = mesh_of(shapes.plane_grid(4, 4))
    mapping = BarycentricMapping()
    mapping.place(99, 0, (0.2, 0.3, 0.5))
    far = next(e for e in m.edges() if 0 not in m.edge_faces(e) and not m.is_boundary_edge(e))
    flip_edge(m, far, mapping=mapping)
    assert tuple(mapping[99]) == (0, (0.2, 0.3, 0.5))


@settings(max_examples=100, deadline=None)
@given(st.tuples(st.floats(0.01, 1.0), st.floats(0.01, 1.0), st.floats(0.01, 1.0)), st.booleans())
def test_flip_round_trip_restores_coordinates(raw, second_face):
    total = sum(raw)
    coords = tuple(x / total for x in raw)
    m, mapping = square_with_point(coords)
    if second_face:
        mapping.place(99, 1, coords)
    before = mapping[99]
    log = FlipLog()
    e = next(e for e in m.edges() if set(m.edge_vertices(e)) == {0, 1})
    flip_edge(m, e, log, mapping)
    undo_flips(m, log, mapping)
    after = mapping[99]
    assert after.face == before.face
    assert np.allclose(after.coords, before.coords, atol=1e-9)


def test_random_flips_keep_points_in_place(rng):
    points = planar_points(50, rng)
    m = planar_delaunay_mesh(points)
    mapping = BarycentricMapping()
    targets = {}
    for k, f in enumerate(m.faces()[:30]):
        w = tuple(rng.dirichlet((1.0, 1.0, 1.0)))
        mapping.place(1000 + k, f, w)
        targets[1000 + k] = np.asarray(w) @ points[list(m.face_vertices(f))]
    random_flips(m, 300, rng, mapping=mapping)
    mapping.check(m)
    for v, target in targets.items():
        face, coords = mapping[v]
        assert np.allclose(np.asarray(coords) @ points[list(m.face_vertices(face))], target, atol=1e-9)


def test_reverse_index_after_simplify():
    m = mesh_of(shapes.noisy_plane(10, 10))
    report, mapping = simplify(m, SimplifyConfig(kappa_max=0.5))
    mapping.check(m)
    assert sorted(v for f in mapping.by_face for v in mapping.hosted(f)) == sorted(mapping.points)
    assert len(mapping) == report.removed
    for v, point in mapping.items():
        assert abs(sum(point.coords) - 1.0) <= 1e-9
        assert not m.vertex_alive(v)
