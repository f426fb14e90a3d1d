"""Intrinsic barycentric coordinates of removed vertices.

Every removed vertex is stored as a point in a live face of the simplified
mesh. Points move with the mesh: flips re-express them in the new faces via
a planar unfolding, and vertex removals substitute the removed vertex's own
coordinates into the points that referenced it.
"""

import math
import time
from dataclasses import dataclass

from .mesh import TWO_PI, angle_from_lengths, stable_area

INSIDE_EPS = 1e-9
OUTSIDE_ABORT = 1e-6
ANGLE_SUM_TOL = 1e-9


class ProjectionError(ValueError):
    """No valid flattening exists for a removed vertex."""


@dataclass(slots=True)
class BarycentricPoint:
    face: int
    coords: tuple  # weights of the host face's corners, in corner order

    def __iter__(self):
        return iter((self.face, self.coords))


def barycentric_2d(p, tri):
    (x0, y0), (x1, y1), (x2, y2) = tri
    det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
    w1 = ((p[0] - x0) * (y2 - y0) - (x2 - x0) * (p[1] - y0)) / det
    w2 = ((x1 - x0) * (p[1] - y0) - (p[0] - x0) * (y1 - y0)) / det
    return (1.0 - w1 - w2, w1, w2)


def _clamped(coords):
    c = [max(0.0, w) for w in coords]
    total = c[0] + c[1] + c[2]
    return (c[0] / total, c[1] / total, c[2] / total)


def _normalized(coords):
    total = coords[0] + coords[1] + coords[2]
    return (coords[0] / total, coords[1] / total, coords[2] / total)


# ----------------------------------------------------------------------
# flattening a valence-3 vertex


def _fan_angle_sum(scale, outer, spokes):
    """Angle sum at the centre of the fan with spokes scaled by ``scale``."""
    l_jk, l_kl, l_lj = outer
    p, q, r = (scale * x for x in spokes)
    return (angle_from_lengths(p, q, l_jk) + angle_from_lengths(q, r, l_kl)
            + angle_from_lengths(r, p, l_lj))


def _closes(a, b, c):
    # non-strict: a vertex lying on an outer side still has a location
    return a + b >= c and b + c >= a and c + a >= b


def _fan_is_valid(scale, outer, spokes):
    l_jk, l_kl, l_lj = outer
    p, q, r = (scale * x for x in spokes)
    return _closes(p, q, l_jk) and _closes(q, r, l_kl) and _closes(r, p, l_lj)


def _positive_roots(a2, a1, a0):
    scale = max(abs(a2), abs(a1), abs(a0))
    if abs(a2) <= 1e-14 * scale:
        return [-a0 / a1] if a1 != 0.0 else []
    disc = a1 * a1 - 4.0 * a2 * a0
    if disc < 0.0:
        if disc < -1e-12 * a1 * a1:
            return []
        disc = 0.0
    root = math.sqrt(disc)
    # avoid cancellation: q and the Vieta partner
    q = -0.5 * (a1 + math.copysign(root, a1))
    roots = [q / a2]
    if q != 0.0:
        roots.append(a0 / q)
    return [u for u in roots if u > 0.0]


def conformal_scale_from_lengths(outer, spokes):
    """Uniform spoke scale that flattens a valence-3 vertex.

    Parameters
    ----------
    outer : (l_jk, l_kl, l_lj)
        Side lengths of the triangle left after removal, in its corner order.
    spokes : (l_ij, l_ik, l_il)
        Lengths of the three edges from the removed vertex to j, k and l.

    The corner angle of jkl at j must split into the angles of the scaled
    triangles jki and jil. Squaring the cosine of that condition gives a
    quadratic in ``s**2``; each positive root is accepted only if the scaled
    fan closes up (angle sum 2pi at the vertex) and stays non-degenerate.

    Raises
    ------
    ProjectionError
        If no root yields a valid flat fan.
    """
    l_jk, l_kl, l_lj = (float(x) for x in outer)
    p, q, r = (float(x) for x in spokes)
    if abs(_fan_angle_sum(1.0, outer, spokes) - TWO_PI) <= 1e-12 and _fan_is_valid(1.0, outer, spokes):
        return 1.0

    a, b, c = l_jk, l_lj, l_kl
    cos_j = (a * a + b * b - c * c) / (2.0 * a * b)
    big_p = p * p - q * q
    big_r = p * p - r * r
    a2 = a * a * big_r * big_r + b * b * big_p * big_p - 2.0 * a * b * cos_j * big_p * big_r
    a1 = (2.0 * a * a * b * b * (big_r + big_p)
          - 2.0 * a * b * cos_j * (a * a * big_r + b * b * big_p)
          - 4.0 * a * a * b * b * p * p * (1.0 - cos_j * cos_j))
    a0 = a * a * b * b * c * c

    candidates = []
    for u in _positive_roots(a2, a1, a0):
        s = math.sqrt(u)
        if not _fan_is_valid(s, outer, spokes):
            continue
        err = abs(_fan_angle_sum(s, outer, spokes) - TWO_PI)
        if err <= 1e-6:
            candidates.append((err, abs(s - 1.0), s))
    if not candidates:
        raise ProjectionError("no positive scale flattens the vertex without degenerate triangles")
    passing = [cand for cand in candidates if cand[0] <= ANGLE_SUM_TOL]
    pool = passing or [min(candidates)]
    return min(pool, key=lambda cand: cand[1])[2]


def project_from_lengths(outer, spokes, scale):
    """Barycentric coordinates of the flattened vertex in triangle jkl."""
    l_jk, l_kl, l_lj = outer
    p, q, r = (scale * x for x in spokes)
    tri = ((0.0, 0.0), (l_jk, 0.0), _layout_apex(l_jk, l_lj, l_kl))
    x = (l_jk * l_jk + p * p - q * q) / (2.0 * l_jk)
    y = 2.0 * stable_area(l_jk, p, q) / l_jk
    dist_l = math.hypot(x - tri[2][0], y - tri[2][1])
    if abs(dist_l - r) > OUTSIDE_ABORT * max(r, l_jk):
        raise RuntimeError(
            f"flattened vertex misses the third corner: distance {dist_l} vs spoke {r}"
        )
    coords = barycentric_2d((x, y), tri)
    if min(coords) < -OUTSIDE_ABORT:
        raise RuntimeError(f"flattened vertex lies outside its triangle: {coords}")
    return _clamped(coords)


def _layout_apex(base, from_origin, from_end):
    x = (base * base + from_origin * from_origin - from_end * from_end) / (2.0 * base)
    return (x, 2.0 * stable_area(base, from_origin, from_end) / base)


def valence3_fan(mesh, v):
    """Spoke halfedges ``(h1, h2, h3)`` and outer halfedges ``(n1, n2, n3)``.

    ``h1`` runs v -> j, ``h2`` v -> k, ``h3`` v -> l, and ``n1, n2, n3`` run
    j -> k -> l -> j, which is the triangle left once ``v`` is removed.
    """
    h1 = mesh.vert_he[v]
    n1 = mesh.he_next[h1]
    h2 = mesh.he_twin[mesh.he_next[n1]]
    n2 = mesh.he_next[h2]
    h3 = mesh.he_twin[mesh.he_next[n2]]
    n3 = mesh.he_next[h3]
    return (h1, h2, h3), (n1, n2, n3)


def _fan_lengths(mesh, v):
    spokes_he, outer_he = valence3_fan(mesh, v)
    ln = mesh.length
    he = mesh.he_edge
    return tuple(ln[he[x]] for x in outer_he), tuple(ln[he[x]] for x in spokes_he)


def conformal_scale(mesh, v):
    """Scale for interior valence-3 vertex ``v`` (see :func:`conformal_scale_from_lengths`)."""
    return conformal_scale_from_lengths(*_fan_lengths(mesh, v))


def project_removed_vertex(mesh, v, scale):
    """Coordinates of ``v`` in the j, k, l order of :func:`valence3_fan`."""
    return project_from_lengths(*_fan_lengths(mesh, v), scale)


def substitute_dependent(coords_v, coords_i):
    """Re-express a point of face (i, j, k) in face (j, k, l).

    ``coords_v`` are weights on (i, j, k) and ``coords_i`` the weights of the
    removed vertex i on (j, k, l).
    """
    cvi, cvj, cvk = coords_v
    cij, cik, cil = coords_i
    return (cvj + cvi * cij, cvk + cvi * cik, cvi * cil)


# ----------------------------------------------------------------------


class BarycentricMapping:
    """Removed vertex -> host face and barycentric coordinates.

    ``points`` is the forward map and ``by_face`` the reverse index from a
    face id to the set of removed vertices it hosts.
    """

    def __init__(self):
        self.points = {}
        self.by_face = {}
        self.elapsed = 0.0  # seconds spent updating coordinates

    def __len__(self):
        return len(self.points)

    def __contains__(self, v):
        return v in self.points

    def __getitem__(self, v):
        return self.points[v]

    def items(self):
        return self.points.items()

    def has_points(self, *faces):
        by_face = self.by_face
        return any(f in by_face for f in faces)

    def hosted(self, f):
        return self.by_face.get(f, ())

    def place(self, v, face, coords):
        old = self.points.get(v)
        if old is not None:
            hosted = self.by_face.get(old.face)
            if hosted is not None:
                hosted.discard(v)
                if not hosted:
                    del self.by_face[old.face]
        self.points[v] = BarycentricPoint(face, coords)
        self.by_face.setdefault(face, set()).add(v)

    def _take(self, faces):
        taken = []
        for f in faces:
            hosted = self.by_face.pop(f, None)
            if hosted:
                taken.extend((v, self.points[v]) for v in sorted(hosted))
        return taken

    def update_on_flip(self, edge, before, after):
        """Relocate points hosted by the two faces of a flipped edge.

        ``before`` and ``after`` map each of the two face ids to the planar
        corner positions of that face before and after the flip, in one
        common unfolding.
        """
        start = time.perf_counter()
        faces = sorted(before)
        for v, point in self._take(faces):
            tri = before[point.face]
            c0, c1, c2 = point.coords
            x = c0 * tri[0][0] + c1 * tri[1][0] + c2 * tri[2][0]
            y = c0 * tri[0][1] + c1 * tri[1][1] + c2 * tri[2][1]
            best = None
            for f in faces:
                coords = barycentric_2d((x, y), after[f])
                worst = min(coords)
                if worst >= -INSIDE_EPS:
                    best = (f, coords)
                    break
                if best is None or worst > min(best[1]):
                    best = (f, coords)
            f, coords = best
            if min(coords) < -OUTSIDE_ABORT:
                raise RuntimeError(
                    f"tracked vertex {v} left flipped edge {edge}'s quad: {coords}"
                )
            self.place(v, f, _clamped(coords))
        self.elapsed += time.perf_counter() - start

    def rehost(self, corner_images, new_face):
        """Move points from merged faces into ``new_face``.

        ``corner_images`` maps each old face id to the three coordinate
        vectors (in ``new_face``'s corner order) of that face's corners.
        """
        for v, point in self._take(sorted(corner_images)):
            images = corner_images[point.face]
            c = point.coords
            coords = tuple(
                c[0] * images[0][m] + c[1] * images[1][m] + c[2] * images[2][m]
                for m in range(3)
            )
            self.place(v, new_face, _normalized(coords))

    def check(self, mesh, tol=INSIDE_EPS):
        seen = 0
        for f, hosted in self.by_face.items():
            assert mesh.face_alive(f), f"face {f} hosts points but is dead"
            for v in hosted:
                assert self.points[v].face == f
                seen += 1
        assert seen == len(self.points)
        for v, point in self.points.items():
            assert abs(sum(point.coords) - 1.0) <= tol
            assert min(point.coords) >= -tol, (v, point)
        return self
