"""Intrinsic edge flips, exact undo and intrinsic Delaunay flipping."""

import math
from dataclasses import dataclass

from .mesh import satisfies_triangle_inequality, stable_area

DELAUNAY_TOLERANCE = 1e-10
FLIP_MARGIN = 1e-12


class FlipError(RuntimeError):
    pass


@dataclass(slots=True)
class FlipRecord:
    """Everything needed to put one flipped edge back bit-exactly."""

    edge: int
    length: float
    halfedges: tuple  # (h, hb, hc, t, tb, tc) before the flip
    state: tuple  # (next, vert, face) of each halfedge before the flip
    faces: tuple  # ((f0, face_he[f0]), (f1, face_he[f1]))
    anchors: tuple  # ((vertex, vert_he[vertex]), ...) for the two endpoints


class FlipLog:
    """Append-only record of flips; undone last-in first-out."""

    def __init__(self):
        self.records = []

    def append(self, record):
        self.records.append(record)

    def clear(self):
        self.records.clear()

    def edges(self):
        return [r.edge for r in self.records]

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __bool__(self):
        return bool(self.records)


class Quad:
    """Planar unfolding of the two triangles incident to a halfedge ``h``.

    ``h`` runs a -> b and is laid out along the positive x axis from the
    origin; the apex ``c`` of the face of ``h`` gets y > 0 and the apex ``d``
    of the twin face y < 0. The four outer halfedges keep their origins
    through a flip, so they index the corner positions.
    """

    __slots__ = ("h", "t", "pa", "pb", "pc", "pd", "outer", "succ")

    def __init__(self, mesh, h):
        nxt = mesh.he_next
        ln = mesh.length
        he = mesh.he_edge
        t = mesh.he_twin[h]
        hb = nxt[h]
        hc = nxt[hb]
        tb = nxt[t]
        tc = nxt[tb]
        L = ln[he[h]]
        self.h = h
        self.t = t
        self.pa = (0.0, 0.0)
        self.pb = (L, 0.0)
        self.pc = _apex(L, ln[he[hc]], ln[he[hb]], 1.0)
        self.pd = _apex(L, ln[he[tb]], ln[he[tc]], -1.0)
        self.outer = {tb: self.pa, tc: self.pd, hb: self.pb, hc: self.pc}
        self.succ = {tb: tc, tc: hb, hb: hc, hc: tb}

    def diagonal_length(self):
        return math.hypot(self.pc[0] - self.pd[0], self.pc[1] - self.pd[1])

    def corner_positions(self, mesh, f):
        """Planar positions of the corners of ``f`` (in corner order)."""
        out = []
        for x in mesh.face_halfedges(f):
            p = self.outer.get(x)
            if p is None:
                p = self.outer[self.succ[mesh.prev(x)]]
            out.append(p)
        return out


def _apex(base, from_origin, from_end, side):
    x = (base * base + from_origin * from_origin - from_end * from_end) / (2.0 * base)
    y = side * 2.0 * stable_area(base, from_origin, from_end) / base
    return (x, y)


def _cross(o, p, q):
    return (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0])


def _flip_geometry(mesh, e):
    """Quad and prospective new length, or ``None`` if ``e`` cannot flip."""
    h = mesh.edge_he[e]
    t = mesh.he_twin[h]
    if t == -1 or mesh.he_face[h] == mesh.he_face[t]:
        return None
    q = Quad(mesh, h)
    new_length = q.diagonal_length()
    if not new_length > 0.0:
        return None
    ln = mesh.length
    he = mesh.he_edge
    nxt = mesh.he_next
    l_bc = ln[he[nxt[h]]]
    l_ca = ln[he[nxt[nxt[h]]]]
    l_ad = ln[he[nxt[t]]]
    l_db = ln[he[nxt[nxt[t]]]]
    if not (satisfies_triangle_inequality(l_ca, l_ad, new_length, FLIP_MARGIN)
            and satisfies_triangle_inequality(l_db, l_bc, new_length, FLIP_MARGIN)):
        return None
    # strictly convex quad: both new triangles keep counter-clockwise orientation
    if _cross(q.pc, q.pa, q.pd) <= 0.0 or _cross(q.pd, q.pb, q.pc) <= 0.0:
        return None
    return q, new_length


def is_flippable(mesh, e):
    """True if ``e`` is interior and the unfolded quad is strictly convex."""
    return _flip_geometry(mesh, e) is not None


def flip_edge(mesh, e, log=None, mapping=None):
    """Flip interior edge ``e`` in place and return its new length.

    The edge keeps its id and halfedge ids; only its endpoints and length
    change. A record is appended to ``log`` when given, and barycentric
    points hosted in the two faces are relocated when ``mapping`` is given.

    Raises
    ------
    FlipError
        If the edge is not flippable; the mesh is left untouched.
    """
    geometry = _flip_geometry(mesh, e)
    if geometry is None:
        raise FlipError(f"edge {e} is not flippable")
    quad, new_length = geometry

    nxt = mesh.he_next
    vert = mesh.he_vert
    face = mesh.he_face
    h = quad.h
    t = quad.t
    hb = nxt[h]
    hc = nxt[hb]
    tb = nxt[t]
    tc = nxt[tb]
    f0 = face[h]
    f1 = face[t]
    a = vert[h]
    b = vert[t]

    before = None
    if mapping is not None and mapping.has_points(f0, f1):
        before = {f0: quad.corner_positions(mesh, f0), f1: quad.corner_positions(mesh, f1)}

    if log is not None:
        hs = (h, hb, hc, t, tb, tc)
        log.append(FlipRecord(
            edge=e,
            length=mesh.length[e],
            halfedges=hs,
            state=tuple((nxt[x], vert[x], face[x]) for x in hs),
            faces=((f0, mesh.face_he[f0]), (f1, mesh.face_he[f1])),
            anchors=((a, mesh.vert_he[a]), (b, mesh.vert_he[b])),
        ))

    c = vert[hc]
    d = vert[tc]
    vert[h] = d
    vert[t] = c
    nxt[h] = hc
    nxt[hc] = tb
    nxt[tb] = h
    nxt[t] = tc
    nxt[tc] = hb
    nxt[hb] = t
    face[tb] = f0
    face[hb] = f1
    mesh.face_he[f0] = h
    mesh.face_he[f1] = t
    if mesh.vert_he[a] == h:
        mesh.vert_he[a] = tb
    if mesh.vert_he[b] == t:
        mesh.vert_he[b] = hb
    mesh.length[e] = new_length

    if before is not None:
        after = {f0: quad.corner_positions(mesh, f0), f1: quad.corner_positions(mesh, f1)}
        mapping.update_on_flip(e, before, after)
    return new_length


def _unflip(mesh, record, mapping=None):
    hs = record.halfedges
    h = hs[0]
    (f0, fh0), (f1, fh1) = record.faces
    if (mesh.he_edge[h] != record.edge or mesh.he_twin[h] != hs[3]
            or {mesh.he_face[x] for x in hs} != {f0, f1}):
        raise FlipError(f"flip log is inconsistent with the mesh at edge {record.edge}")

    before = quad = None
    if mapping is not None and mapping.has_points(f0, f1):
        quad = Quad(mesh, h)
        before = {f0: quad.corner_positions(mesh, f0), f1: quad.corner_positions(mesh, f1)}

    nxt = mesh.he_next
    vert = mesh.he_vert
    face = mesh.he_face
    for x, (n, v, f) in zip(hs, record.state):
        nxt[x] = n
        vert[x] = v
        face[x] = f
    mesh.face_he[f0] = fh0
    mesh.face_he[f1] = fh1
    for v, anchor in reversed(record.anchors):
        mesh.vert_he[v] = anchor
    mesh.length[record.edge] = record.length

    if before is not None:
        after = {f0: quad.corner_positions(mesh, f0), f1: quad.corner_positions(mesh, f1)}
        mapping.update_on_flip(record.edge, before, after)


def undo_flips(mesh, log, mapping=None):
    """Undo every flip in ``log`` in reverse order and empty the log."""
    records = log.records
    while records:
        _unflip(mesh, records.pop(), mapping)


def opposite_angle_sum(mesh, e):
    h = mesh.edge_he[e]
    t = mesh.he_twin[h]
    if t == -1:
        return mesh.halfedge_angle(mesh.prev(h))
    return mesh.halfedge_angle(mesh.prev(h)) + mesh.halfedge_angle(mesh.prev(t))


def is_delaunay(mesh, e, tolerance=DELAUNAY_TOLERANCE):
    """Angle-sum test; boundary edges are always Delaunay."""
    if mesh.is_boundary_edge(e):
        return True
    return opposite_angle_sum(mesh, e) <= math.pi + tolerance


def _quad_edges(mesh, e):
    h = mesh.edge_he[e]
    t = mesh.he_twin[h]
    nxt = mesh.he_next
    he = mesh.he_edge
    return (he[nxt[h]], he[nxt[nxt[h]]], he[nxt[t]], he[nxt[nxt[t]]])


def flip_until_delaunay(mesh, edges, tolerance=DELAUNAY_TOLERANCE, mapping=None,
                        max_flips=None):
    """Flip non-Delaunay edges starting from the stack ``edges``.

    The stack is processed last-in first-out; every flip pushes the four
    edges of the two new triangles. Returns the number of flips.
    """
    if max_flips is None:
        max_flips = 50 * max(mesh.n_edges, 1)
    stack = list(edges)
    queued = set(stack)
    flips = 0
    while stack:
        e = stack.pop()
        queued.discard(e)
        if not mesh.edge_alive(e) or is_delaunay(mesh, e, tolerance):
            continue
        if not is_flippable(mesh, e):
            continue
        flip_edge(mesh, e, mapping=mapping)
        flips += 1
        if flips > max_flips:
            raise FlipError(
                f"Delaunay flipping exceeded {max_flips} flips; numerical pathology suspected"
            )
        for g in _quad_edges(mesh, e):
            if g not in queued:
                queued.add(g)
                stack.append(g)
    return flips


def flip_to_delaunay(mesh, tolerance=DELAUNAY_TOLERANCE, mapping=None):
    """Intrinsic Delaunay retriangulation by edge flips; returns the flip count."""
    return flip_until_delaunay(mesh, reversed(mesh.edges()), tolerance, mapping)
