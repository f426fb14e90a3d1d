"""Delta-complex halfedge mesh carrying intrinsic edge lengths.

Connectivity is stored in flat, index-based tables so that element ids stay
stable while vertices, edges and faces are deleted. Every face is a triangle
with three halfedges; a halfedge on the mesh boundary has twin ``-1`` (there
are no explicit boundary halfedges). Self-edges and multi-edges are allowed.

No vertex positions are kept once a mesh has been built: the edge lengths
are the only geometric data.
"""

import math

TWO_PI = 2.0 * math.pi


class MeshError(ValueError):
    """Raised when input data does not describe a valid intrinsic mesh."""


class NonManifoldError(MeshError):
    pass


class DegenerateFaceError(MeshError):
    def __init__(self, face, lengths):
        self.face = face
        self.lengths = tuple(lengths)
        super().__init__(
            f"face {face} violates the strict triangle inequality "
            f"(side lengths {self.lengths})"
        )


def angle_from_lengths(a, b, opposite):
    """Interior angle between sides ``a`` and ``b`` of a triangle."""
    cos_theta = (a * a + b * b - opposite * opposite) / (2.0 * a * b)
    return math.acos(min(1.0, max(-1.0, cos_theta)))


def heron_area(a, b, c):
    s = 0.5 * (a + b + c)
    return math.sqrt(max(0.0, s * (s - a) * (s - b) * (s - c)))


def stable_area(a, b, c):
    """Triangle area by Kahan's rearrangement of Heron's formula.

    Much better conditioned than :func:`heron_area` for needle triangles,
    which is what the planar layouts need.
    """
    a, b, c = sorted((a, b, c), reverse=True)
    r = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    return 0.25 * math.sqrt(max(0.0, r))


def satisfies_triangle_inequality(a, b, c, rel_margin=1e-12):
    margin = rel_margin * (a + b + c)
    return a + b > c + margin and b + c > a + margin and c + a > b + margin


class IntrinsicMesh:
    """Triangle Delta-complex with one positive length per edge.

    Halfedge tables (indexed by halfedge id):

    ``he_next``, ``he_twin`` (``-1`` on the boundary), ``he_vert`` (origin),
    ``he_edge`` and ``he_face``. A dead halfedge has ``he_face == -1``.

    ``edge_he[e]`` is one halfedge of edge ``e`` and ``length[e]`` its length;
    ``face_he[f]`` is the first halfedge of face ``f`` and fixes the corner
    order of the face. ``vert_he[v]`` is an outgoing halfedge; for boundary
    vertices it is always the outgoing halfedge without twin. Dead elements
    hold ``-1`` in these tables.
    """

    def __init__(self):
        self.he_next = []
        self.he_twin = []
        self.he_vert = []
        self.he_edge = []
        self.he_face = []
        self.edge_he = []
        self.length = []
        self.face_he = []
        self.vert_he = []
        self.on_boundary = []
        self._free_he = []
        self._free_edges = []
        self._free_faces = []
        self.n_vertices = 0
        self.n_edges = 0
        self.n_faces = 0

    # ------------------------------------------------------------------
    # construction

    @classmethod
    def from_face_tables(cls, n_vertices, faces, twins, side_lengths):
        """Build a mesh from per-face side tables.

        Parameters
        ----------
        n_vertices : int
            Number of vertex slots. Slots not referenced by any face are dead.
        faces : sequence of (int, int, int)
            Corner vertex ids; side ``s`` runs from corner ``s`` to ``s + 1``.
        twins : sequence of 3-sequences of (face, side) or None
            Glued side for every side, ``None`` on the boundary.
        side_lengths : sequence of 3-sequences of float
            Length of every side. Glued sides must agree.
        """
        mesh = cls()
        n_faces = len(faces)
        nh = 3 * n_faces
        mesh.he_next = [3 * (h // 3) + (h + 1) % 3 for h in range(nh)]
        mesh.he_twin = [-1] * nh
        mesh.he_vert = [-1] * nh
        mesh.he_edge = [-1] * nh
        mesh.he_face = [h // 3 for h in range(nh)]
        mesh.face_he = [3 * f for f in range(n_faces)]
        mesh.vert_he = [-1] * n_vertices
        mesh.on_boundary = [False] * n_vertices

        for f, corners in enumerate(faces):
            if len(corners) != 3:
                raise MeshError(f"face {f} is not a triangle")
            for s, v in enumerate(corners):
                if not 0 <= v < n_vertices:
                    raise MeshError(f"face {f} references unknown vertex {v}")
                mesh.he_vert[3 * f + s] = int(v)

        for f in range(n_faces):
            for s in range(3):
                h = 3 * f + s
                glued = twins[f][s]
                if glued is None:
                    continue
                g, t = glued
                if not (0 <= g < n_faces and 0 <= t < 3):
                    raise MeshError(f"face {f} side {s}: bad twin reference {glued}")
                other = 3 * g + t
                back = twins[g][t]
                if back is None or 3 * back[0] + back[1] != h or other == h:
                    raise MeshError(f"face {f} side {s}: twin references are not mutual")
                if (mesh.he_vert[h] != mesh.he_vert[mesh.he_next[other]]
                        or mesh.he_vert[other] != mesh.he_vert[mesh.he_next[h]]):
                    raise MeshError(f"face {f} side {s}: glued sides have mismatched endpoints")
                mesh.he_twin[h] = other

        for h in range(nh):
            if mesh.he_edge[h] != -1:
                continue
            f, s = divmod(h, 3)
            ell = float(side_lengths[f][s])
            if not ell > 0.0 or math.isinf(ell):
                raise MeshError(f"face {f} side {s}: length must be positive and finite, got {ell}")
            e = len(mesh.edge_he)
            mesh.edge_he.append(h)
            mesh.length.append(ell)
            mesh.he_edge[h] = e
            t = mesh.he_twin[h]
            if t != -1:
                g, r = divmod(t, 3)
                if float(side_lengths[g][r]) != ell:
                    raise MeshError(
                        f"face {f} side {s}: glued side lengths differ "
                        f"({ell} vs {side_lengths[g][r]})"
                    )
                mesh.he_edge[t] = e

        for f in range(n_faces):
            sides = [mesh.length[mesh.he_edge[3 * f + s]] for s in range(3)]
            if not satisfies_triangle_inequality(*sides, rel_margin=0.0):
                raise DegenerateFaceError(f, sides)

        corner_count = [0] * n_vertices
        for h in range(nh):
            v = mesh.he_vert[h]
            corner_count[v] += 1
            if mesh.he_twin[h] == -1:
                if mesh.on_boundary[v]:
                    raise NonManifoldError(f"vertex {v} has more than one boundary fan")
                mesh.on_boundary[v] = True
                mesh.vert_he[v] = h
            elif mesh.vert_he[v] == -1:
                mesh.vert_he[v] = h

        mesh.n_vertices = sum(1 for v in range(n_vertices) if corner_count[v] > 0)
        mesh.n_edges = len(mesh.edge_he)
        mesh.n_faces = n_faces
        for v in range(n_vertices):
            if corner_count[v] and sum(1 for _ in mesh.outgoing(v)) != corner_count[v]:
                raise NonManifoldError(f"vertex {v} is not a manifold vertex (multiple fans)")
        return mesh

    def to_face_tables(self):
        """Inverse of :meth:`from_face_tables` over the live faces.

        Returns ``(n_vertex_slots, faces, twins, side_lengths, face_ids)``,
        where live faces are numbered compactly in id order and ``face_ids``
        lists the original id of each row. Corner order follows ``face_he``.
        """
        face_ids = self.faces()
        row = {f: i for i, f in enumerate(face_ids)}
        side = {}
        for f in face_ids:
            for s, h in enumerate(self.face_halfedges(f)):
                side[h] = (row[f], s)
        faces, twins, lengths = [], [], []
        for f in face_ids:
            hs = self.face_halfedges(f)
            faces.append(tuple(self.he_vert[h] for h in hs))
            twins.append(tuple(side[self.he_twin[h]] if self.he_twin[h] != -1 else None for h in hs))
            lengths.append(tuple(self.length[self.he_edge[h]] for h in hs))
        return self.n_vertex_slots, faces, twins, lengths, face_ids

    # ------------------------------------------------------------------
    # traversal

    def next(self, h):
        return self.he_next[h]

    def prev(self, h):
        return self.he_next[self.he_next[h]]

    def tip(self, h):
        return self.he_vert[self.he_next[h]]

    def face_halfedges(self, f):
        h0 = self.face_he[f]
        h1 = self.he_next[h0]
        return h0, h1, self.he_next[h1]

    def face_vertices(self, f):
        return tuple(self.he_vert[h] for h in self.face_halfedges(f))

    def face_lengths(self, f):
        """Side lengths of ``f`` in corner order (side s leaves corner s)."""
        return tuple(self.length[self.he_edge[h]] for h in self.face_halfedges(f))

    def outgoing(self, v):
        """Outgoing halfedges of ``v`` in counter-clockwise ring order.

        Terminates on self-edges and degree-one vertices: the walk stops when
        it returns to the start or runs into the boundary.
        """
        h0 = self.vert_he[v]
        if h0 == -1:
            return
        h = h0
        while True:
            yield h
            h = self.he_twin[self.he_next[self.he_next[h]]]
            if h == -1 or h == h0:
                return

    def edge_vertices(self, e):
        h = self.edge_he[e]
        return self.he_vert[h], self.tip(h)

    def edge_faces(self, e):
        h = self.edge_he[e]
        t = self.he_twin[h]
        return self.he_face[h], (self.he_face[t] if t != -1 else -1)

    def is_boundary_edge(self, e):
        return self.he_twin[self.edge_he[e]] == -1

    # ------------------------------------------------------------------
    # liveness and counts

    def vertex_alive(self, v):
        return 0 <= v < len(self.vert_he) and self.vert_he[v] != -1

    def edge_alive(self, e):
        return 0 <= e < len(self.edge_he) and self.edge_he[e] != -1

    def face_alive(self, f):
        return 0 <= f < len(self.face_he) and self.face_he[f] != -1

    def vertices(self):
        return [v for v, h in enumerate(self.vert_he) if h != -1]

    def edges(self):
        return [e for e, h in enumerate(self.edge_he) if h != -1]

    def faces(self):
        return [f for f, h in enumerate(self.face_he) if h != -1]

    @property
    def n_vertex_slots(self):
        return len(self.vert_he)

    def euler_characteristic(self):
        return self.n_vertices - self.n_edges + self.n_faces

    # ------------------------------------------------------------------
    # intrinsic measures

    def halfedge_angle(self, h):
        """Corner angle at the origin of ``h`` inside the face of ``h``."""
        ln = self.length
        he = self.he_edge
        nx = self.he_next[h]
        return angle_from_lengths(ln[he[h]], ln[he[self.he_next[nx]]], ln[he[nx]])

    def corner_angle(self, f, v):
        """Interior angle of face ``f`` at its (first) corner at vertex ``v``."""
        for h in self.face_halfedges(f):
            if self.he_vert[h] == v:
                return self.halfedge_angle(h)
        raise KeyError(f"vertex {v} is not a corner of face {f}")

    def face_area(self, f):
        return heron_area(*self.face_lengths(f))

    def total_area(self):
        return math.fsum(self.face_area(f) for f in self.faces())

    def cone_angle(self, v):
        return math.fsum(self.halfedge_angle(h) for h in self.outgoing(v))

    def gaussian_curvature(self, v):
        """Angle defect ``2pi - alpha`` (interior) or ``pi - alpha`` (boundary)."""
        full = math.pi if self.on_boundary[v] else TWO_PI
        return full - self.cone_angle(v)

    def curvature_sum(self):
        return math.fsum(self.gaussian_curvature(v) for v in self.vertices())

    def vertex_valence(self, v):
        """Number of edge incidences at ``v``; a self-edge counts twice."""
        n = sum(1 for _ in self.outgoing(v))
        return n + 1 if self.on_boundary[v] else n

    def is_boundary_vertex(self, v):
        return self.on_boundary[v]

    def has_self_edge(self, v):
        # both halfedges of a self-edge leave v, so the fan sees every one
        return any(self.tip(h) == v for h in self.outgoing(v))

    def _last_outgoing(self, v):
        last = -1
        for h in self.outgoing(v):
            last = h
        return last

    def neighbors(self, v):
        """Vertices adjacent to ``v`` in ring order (with repeats)."""
        ring = [self.tip(h) for h in self.outgoing(v)]
        if self.on_boundary[v]:
            ring.append(self.he_vert[self.prev(self._last_outgoing(v))])
        return ring

    def boundary_loops(self):
        """Boundary loops as lists of vertex ids, each in boundary order."""
        seen = set()
        loops = []
        for h0, t in enumerate(self.he_twin):
            if t != -1 or self.he_face[h0] == -1 or h0 in seen:
                continue
            loop = []
            h = h0
            while h not in seen:
                seen.add(h)
                loop.append(self.he_vert[h])
                h = self.vert_he[self.tip(h)]
            loops.append(loop)
        return loops

    # ------------------------------------------------------------------
    # element allocation (used by the mutating modules)

    def _new_face(self):
        if self._free_faces:
            f = self._free_faces.pop()
        else:
            f = len(self.face_he)
            self.face_he.append(-1)
        self.n_faces += 1
        return f

    def _kill_face(self, f):
        self.face_he[f] = -1
        self._free_faces.append(f)
        self.n_faces -= 1

    def _new_edge(self, length):
        # always a fresh id, so a surviving id never names a different edge
        e = len(self.edge_he)
        self.edge_he.append(-1)
        self.length.append(length)
        self.n_edges += 1
        return e

    def _kill_edge(self, e):
        self.edge_he[e] = -1
        self._free_edges.append(e)
        self.n_edges -= 1

    def _kill_halfedge(self, h):
        self.he_face[h] = -1
        self.he_next[h] = -1
        self.he_twin[h] = -1
        self._free_he.append(h)

    def _kill_vertex(self, v):
        self.vert_he[v] = -1
        self.n_vertices -= 1

    # ------------------------------------------------------------------

    def copy(self):
        other = IntrinsicMesh()
        for name, value in vars(self).items():
            setattr(other, name, list(value) if isinstance(value, list) else value)
        return other

    def signature(self):
        """Canonical, hashable snapshot of connectivity and lengths."""
        return (
            tuple(self.he_next), tuple(self.he_twin), tuple(self.he_vert),
            tuple(self.he_edge), tuple(self.he_face), tuple(self.edge_he),
            tuple(self.length[e] if self.edge_he[e] != -1 else None
                  for e in range(len(self.edge_he))),
            tuple(self.face_he), tuple(self.vert_he),
        )

    def check(self, tol=1e-12):
        """Assert every structural invariant; returns ``self`` for chaining."""
        for f in self.faces():
            hs = self.face_halfedges(f)
            assert self.he_next[hs[2]] == hs[0], f"face {f} is not a triangle"
            for h in hs:
                assert self.he_face[h] == f, f"halfedge {h} lost its face {f}"
            ls = self.face_lengths(f)
            assert satisfies_triangle_inequality(*ls, rel_margin=0.0), f"face {f} degenerate {ls}"
        for h, f in enumerate(self.he_face):
            if f == -1:
                continue
            t = self.he_twin[h]
            if t != -1:
                assert self.he_twin[t] == h and self.he_edge[t] == self.he_edge[h]
                assert self.he_vert[t] == self.tip(h)
            assert self.edge_he[self.he_edge[h]] != -1
        for e in self.edges():
            assert self.length[e] > 0
            assert self.he_edge[self.edge_he[e]] == e
        for v in self.vertices():
            h = self.vert_he[v]
            assert self.he_vert[h] == v and self.he_face[h] != -1
            if self.on_boundary[v]:
                assert self.he_twin[h] == -1, f"boundary vertex {v} anchor is interior"
        assert self.n_vertices == len(self.vertices())
        assert self.n_edges == len(self.edges())
        assert self.n_faces == len(self.faces())
        return self


def build_from_extrinsic(positions, faces):
    """Intrinsic mesh of an oriented manifold triangle mesh.

    Edge lengths are Euclidean distances between endpoint positions; vertex
    ids are the indices into ``positions``. Positions not used by any face
    become dead vertex slots.

    Raises
    ------
    NonManifoldError
        If an edge has more than two faces, orientation is inconsistent or a
        vertex has more than one fan.
    DegenerateFaceError
        If a face violates the strict triangle inequality.
    """
    positions = [tuple(map(float, p)) for p in positions]
    faces = [tuple(int(v) for v in f) for f in faces]
    directed = {}
    for f, (a, b, c) in enumerate(faces):
        if a == b or b == c or c == a:
            raise MeshError(f"face {f} repeats a vertex: {(a, b, c)}")
        for s, (u, v) in enumerate(((a, b), (b, c), (c, a))):
            if (u, v) in directed:
                g, _ = directed[(u, v)]
                raise NonManifoldError(
                    f"directed edge ({u}, {v}) used by faces {g} and {f}: "
                    "non-manifold edge or inconsistent orientation"
                )
            directed[(u, v)] = (f, s)

    twins = [[None, None, None] for _ in faces]
    side_lengths = [[0.0, 0.0, 0.0] for _ in faces]
    cache = {}
    for (u, v), (f, s) in directed.items():
        twins[f][s] = directed.get((v, u))
        key = (u, v) if u < v else (v, u)
        ell = cache.get(key)
        if ell is None:
            ell = math.dist(positions[u], positions[v])
            if ell == 0.0:
                raise MeshError(f"zero-length edge between vertices {u} and {v}")
            cache[key] = ell
        side_lengths[f][s] = ell

    return IntrinsicMesh.from_face_tables(len(positions), faces, twins, side_lengths)
