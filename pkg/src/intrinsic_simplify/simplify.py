"""Greedy flattest-first vertex removal by intrinsic edge flips."""

import heapq
import math
import random
import time
from collections import Counter
from dataclasses import dataclass, field

from .correspondence import (
    BarycentricMapping,
    ProjectionError,
    conformal_scale,
    project_removed_vertex,
    valence3_fan,
)
from .flips import DELAUNAY_TOLERANCE, FlipLog, flip_edge, flip_to_delaunay, flip_until_delaunay, is_flippable, undo_flips
from .mesh import satisfies_triangle_inequality

STALE_TOL = 1e-12
BOUND_MARGIN = 1e-9

# failure reasons
DEGREE_ONE = "degree_one"
SELF_EDGE = "self_edge"
LOWER_BOUND = "valence_lower_bound"
BELOW_TARGET = "valence_below_target"
UNREACHABLE = "valence_unreachable"
TRIANGLE_INEQUALITY = "triangle_inequality"
PROJECTION = "projection"
ISOLATED_FACE = "isolated_face"
REFLEX_MERGE = "reflex_merge"


class RemovalError(RuntimeError):
    def __init__(self, reason, message=""):
        self.reason = reason
        super().__init__(message or reason)


def valence_lower_bound(kappa):
    """Smallest valence a vertex of curvature ``kappa`` can have, ceil(2 - kappa/pi)."""
    return math.ceil(2.0 - kappa / math.pi)


def target_valence(mesh, v):
    return 2 if mesh.on_boundary[v] else 3


def violates_valence_bound(mesh, v, kappa=None, boundary_merge=True):
    """True if ``v`` cannot reach a removable valence with proper triangles.

    Each corner angle is below pi, so a vertex needs valence above
    2 - kappa/pi (geodesic curvature on the boundary). Interior vertices
    need 3; boundary vertices need 2, or 3 when two-face merging is allowed.
    """
    if kappa is None:
        kappa = mesh.gaussian_curvature(v)
    needed = 3 if boundary_merge else target_valence(mesh, v)
    return 2.0 - kappa / math.pi >= needed - BOUND_MARGIN


@dataclass
class SimplifyConfig:
    kappa_max: float
    track_mappings: bool = True
    delaunay_tolerance: float = DELAUNAY_TOLERANCE
    max_flip_attempts_per_vertex: int = None  # default: 10 x initial valence
    initial_delaunay: bool = True
    boundary_merge: bool = True  # allow valence-3 removal of boundary vertices
    seed: int = None  # tie-break permutation; None breaks ties by vertex id
    protected: frozenset = frozenset()

    def __post_init__(self):
        if not self.kappa_max >= 0.0:
            raise ValueError(f"kappa_max must be >= 0, got {self.kappa_max}")
        if not self.delaunay_tolerance > 0.0:
            raise ValueError("delaunay_tolerance must be positive")
        self.protected = frozenset(self.protected)


@dataclass
class SimplifyReport:
    kappa_max: float
    vertices_before: int = 0
    vertices_after: int = 0
    removable: int = 0
    encountered: int = 0
    removed: int = 0
    failures: Counter = field(default_factory=Counter)
    failed_vertices: dict = field(default_factory=dict)
    curvature_sum_before: float = 0.0
    curvature_sum_after: float = 0.0
    euler_before: int = 0
    euler_after: int = 0
    boundary_loops_before: int = 0
    boundary_loops_after: int = 0
    rounds: int = 0
    flips: int = 0
    remove_time: float = 0.0
    track_time: float = 0.0
    total_time: float = 0.0

    @property
    def failed(self):
        return self.encountered - self.removed

    @property
    def removable_pct(self):
        return 100.0 * self.removable / self.vertices_before if self.vertices_before else 0.0

    @property
    def removed_pct(self):
        """Share of encountered removable vertices that were removed."""
        return 100.0 * self.removed / self.encountered if self.encountered else 100.0


class CurvatureQueue:
    """Min-heap of candidate vertices keyed by current ``|kappa|``.

    Entries are never deleted in place: pushing a vertex again bumps its
    epoch so older entries are skipped when popped.
    """

    def __init__(self, mesh, kappa_max, tiebreak=None):
        self.mesh = mesh
        self.kappa_max = kappa_max
        self.tiebreak = tiebreak
        self._heap = []
        self._epoch = {}

    def __len__(self):
        return len(self._heap)

    def push(self, v, kappa=None):
        """(Re)insert ``v``; returns False if it is not below the threshold."""
        if kappa is None:
            kappa = abs(self.mesh.gaussian_curvature(v))
        epoch = self._epoch.get(v, 0) + 1
        self._epoch[v] = epoch
        if not kappa < self.kappa_max:
            return False
        key = self.tiebreak[v] if self.tiebreak is not None else v
        heapq.heappush(self._heap, (kappa, key, v, epoch))
        return True

    def discard(self, v):
        self._epoch[v] = self._epoch.get(v, 0) + 1

    def pop(self):
        """Live, up-to-date vertex with the smallest ``|kappa|``, or None."""
        mesh = self.mesh
        while self._heap:
            kappa, _, v, epoch = heapq.heappop(self._heap)
            if epoch != self._epoch.get(v) or not mesh.vertex_alive(v):
                continue
            current = abs(mesh.gaussian_curvature(v))
            if abs(current - kappa) > STALE_TOL:
                self.push(v, current)
                continue
            self._epoch[v] = epoch + 1
            return v
        return None


def _reduce(mesh, v, log, mapping=None, max_attempts=None, boundary_merge=True):
    if mesh.vertex_valence(v) <= 1:
        return DEGREE_ONE
    if mesh.has_self_edge(v):
        return SELF_EDGE
    target = target_valence(mesh, v)
    valence = mesh.vertex_valence(v)
    if max_attempts is None:
        max_attempts = 10 * valence
    attempts = 0
    while valence > target:
        if attempts >= max_attempts:
            undo_flips(mesh, log, mapping)
            return UNREACHABLE
        for h in mesh.outgoing(v):
            e = mesh.he_edge[h]
            if is_flippable(mesh, e):
                flip_edge(mesh, e, log, mapping)
                attempts += 1
                break
        else:
            if boundary_merge and mesh.on_boundary[v] and valence == 3:
                return None
            undo_flips(mesh, log, mapping)
            return UNREACHABLE
        valence = mesh.vertex_valence(v)
    if valence < target:
        undo_flips(mesh, log, mapping)
        return BELOW_TARGET
    return None


def reduce_to_removable_valence(mesh, v, log, mapping=None, max_attempts=None,
                                boundary_merge=True):
    """Flip spokes of ``v`` until it has valence 3 (interior) or 2 (boundary).

    Spokes are scanned in ring order and the first flippable one is flipped,
    then the scan restarts. With ``boundary_merge`` a boundary vertex whose
    last interior spoke cannot be flipped is left at valence 3 (see
    :func:`remove_prepared_vertex`). On failure all flips in ``log`` are
    undone and False is returned.
    """
    if violates_valence_bound(mesh, v, boundary_merge=boundary_merge):
        return False
    return _reduce(mesh, v, log, mapping, max_attempts, boundary_merge) is None


def remove_prepared_vertex(mesh, v, mapping=None, log=None):
    """Delete a vertex already reduced to its target valence.

    Interior vertices must have valence 3: the three faces become the
    triangle of the outer edges. Boundary vertices of valence 2 lose their
    single face. A boundary vertex of valence 3 (neighbours j, m, k) has its
    two faces merged into jmk, whose new boundary side jk is the distance
    between j and k with both faces unfolded at the vertex; this equals
    flipping the spoke to m and removing the resulting valence-2 vertex, and
    stays well defined on a straight boundary. The merge requires the two
    corners at m to sum below pi, so the cone angle of m is kept exactly.

    Returns the id of the face that now covers the vertex's former
    neighbourhood. When ``mapping`` is given, the removed vertex and every
    point hosted by the deleted faces are re-expressed in that face.

    Raises
    ------
    RemovalError
        If the remaining triangle would be degenerate or the vertex cannot be
        flattened; nothing has been modified in that case.
    """
    if mesh.on_boundary[v]:
        if mesh.vertex_valence(v) == 3:
            return _merge_boundary(mesh, v, mapping)
        return _remove_boundary(mesh, v, mapping)
    return _remove_interior(mesh, v, mapping)


def _remove_interior(mesh, v, mapping):
    (h1, h2, h3), (n1, n2, n3) = valence3_fan(mesh, v)
    nxt = mesh.he_next
    he = mesh.he_edge
    ln = mesh.length
    p1, p2, p3 = nxt[n1], nxt[n2], nxt[n3]
    if mesh.he_twin[p3] != h1:
        raise RemovalError(UNREACHABLE, f"vertex {v} is not an interior valence-3 vertex")
    outer = (ln[he[n1]], ln[he[n2]], ln[he[n3]])
    if not satisfies_triangle_inequality(*outer):
        raise RemovalError(TRIANGLE_INEQUALITY)

    old_faces = (mesh.he_face[h1], mesh.he_face[h2], mesh.he_face[h3])
    coords_v = None
    if mapping is not None:
        start = time.perf_counter()
        try:
            scale = conformal_scale(mesh, v)
        except ProjectionError as exc:
            mapping.elapsed += time.perf_counter() - start
            raise RemovalError(PROJECTION, str(exc)) from exc
        coords_v = project_removed_vertex(mesh, v, scale)
        images = None
        if mapping.has_points(*old_faces):
            unit = {n1: (1.0, 0.0, 0.0), n2: (0.0, 1.0, 0.0), n3: (0.0, 0.0, 1.0)}
            unit[p1] = unit[n2]
            unit[p2] = unit[n3]
            unit[p3] = unit[n1]
            unit[h1] = unit[h2] = unit[h3] = coords_v
            images = {f: [unit[x] for x in mesh.face_halfedges(f)] for f in old_faces}
        mapping.elapsed += time.perf_counter() - start

    for f in old_faces:
        mesh._kill_face(f)
    for x in (h1, h2, h3):
        mesh._kill_edge(he[x])
    for x in (h1, h2, h3, p1, p2, p3):
        mesh._kill_halfedge(x)
    mesh._kill_vertex(v)

    f = mesh._new_face()
    nxt[n1] = n2
    nxt[n2] = n3
    nxt[n3] = n1
    mesh.he_face[n1] = mesh.he_face[n2] = mesh.he_face[n3] = f
    mesh.face_he[f] = n1
    vert = mesh.he_vert
    for dead, alive in ((p3, n1), (p1, n2), (p2, n3)):
        u = vert[alive]
        if mesh.vert_he[u] == dead:
            mesh.vert_he[u] = alive

    if mapping is not None:
        start = time.perf_counter()
        if images is not None:
            mapping.rehost(images, f)
        mapping.place(v, f, coords_v)
        mapping.elapsed += time.perf_counter() - start
    return f


def _remove_boundary(mesh, v, mapping):
    h1 = mesh.vert_he[v]
    n1 = mesh.he_next[h1]
    p1 = mesh.he_next[n1]
    tw = mesh.he_twin[n1]
    if mesh.he_twin[p1] != -1 or mesh.he_twin[h1] != -1:
        raise RemovalError(UNREACHABLE, f"vertex {v} is not a boundary valence-2 vertex")
    if tw == -1:
        raise RemovalError(ISOLATED_FACE)
    g = mesh.he_face[tw]
    f_old = mesh.he_face[h1]

    if mapping is not None:
        start = time.perf_counter()
        l_j = mesh.length[mesh.he_edge[h1]]
        l_k = mesh.length[mesh.he_edge[p1]]
        along = l_j / (l_j + l_k)
        corners = mesh.face_halfedges(g)
        at_k = corners.index(tw)
        at_j = corners.index(mesh.he_next[tw])
        coords = [0.0, 0.0, 0.0]
        coords[at_k] = along
        coords[at_j] = 1.0 - along
        coords_v = tuple(coords)
        unit_j = tuple(1.0 if m == at_j else 0.0 for m in range(3))
        unit_k = tuple(1.0 if m == at_k else 0.0 for m in range(3))
        unit = {h1: coords_v, n1: unit_j, p1: unit_k}
        images = {f_old: [unit[x] for x in mesh.face_halfedges(f_old)]}
        mapping.elapsed += time.perf_counter() - start

    e_jk = mesh.he_edge[n1]
    mesh._kill_face(f_old)
    mesh._kill_edge(mesh.he_edge[h1])
    mesh._kill_edge(mesh.he_edge[p1])
    for x in (h1, n1, p1):
        mesh._kill_halfedge(x)
    mesh._kill_vertex(v)
    mesh.he_twin[tw] = -1
    mesh.edge_he[e_jk] = tw
    mesh.vert_he[mesh.he_vert[tw]] = tw

    if mapping is not None:
        start = time.perf_counter()
        mapping.rehost(images, g)
        mapping.place(v, g, coords_v)
        mapping.elapsed += time.perf_counter() - start
    return g


def _merge_boundary(mesh, v, mapping):
    nxt = mesh.he_next
    twin = mesh.he_twin
    he = mesh.he_edge
    ln = mesh.length
    h1 = mesh.vert_he[v]  # v -> j, on the boundary
    n1 = nxt[h1]  # j -> m
    p1 = nxt[n1]  # m -> v
    h2 = twin[p1]  # v -> m
    if twin[h1] != -1 or h2 == -1:
        raise RemovalError(UNREACHABLE, f"vertex {v} is not a boundary valence-3 vertex")
    n2 = nxt[h2]  # m -> k
    p2 = nxt[n2]  # k -> v, on the boundary
    if twin[p2] != -1:
        raise RemovalError(UNREACHABLE, f"vertex {v} is not a boundary valence-3 vertex")
    # m keeps its cone angle only if its two corners still fit in one triangle
    if mesh.halfedge_angle(p1) + mesh.halfedge_angle(n2) >= math.pi - BOUND_MARGIN:
        raise RemovalError(REFLEX_MERGE)
    l_j = ln[he[h1]]
    l_k = ln[he[p2]]
    alpha = mesh.halfedge_angle(h1) + mesh.halfedge_angle(h2)
    l_jk = math.sqrt(max(0.0, l_j * l_j + l_k * l_k - 2.0 * l_j * l_k * math.cos(alpha)))
    if not satisfies_triangle_inequality(ln[he[n1]], ln[he[n2]], l_jk):
        raise RemovalError(TRIANGLE_INEQUALITY)

    old_faces = (mesh.he_face[h1], mesh.he_face[h2])
    images = coords_v = None
    if mapping is not None:
        start = time.perf_counter()
        along = l_j / (l_j + l_k)
        coords_v = (1.0 - along, 0.0, along)  # corners j, m, k
        if mapping.has_points(*old_faces):
            unit = {h1: coords_v, h2: coords_v, n1: (1.0, 0.0, 0.0), p1: (0.0, 1.0, 0.0),
                    n2: (0.0, 1.0, 0.0), p2: (0.0, 0.0, 1.0)}
            images = {f: [unit[x] for x in mesh.face_halfedges(f)] for f in old_faces}
        mapping.elapsed += time.perf_counter() - start

    for f in old_faces:
        mesh._kill_face(f)
    for e in (he[h1], he[h2], he[p2]):
        mesh._kill_edge(e)
    for x in (h1, p1, h2):
        mesh._kill_halfedge(x)
    mesh._kill_vertex(v)

    e_jk = mesh._new_edge(l_jk)
    mesh.edge_he[e_jk] = p2
    he[p2] = e_jk
    f = mesh._new_face()
    nxt[n1] = n2
    nxt[n2] = p2
    nxt[p2] = n1
    mesh.he_face[n1] = mesh.he_face[n2] = mesh.he_face[p2] = f
    mesh.face_he[f] = n1
    m = mesh.he_vert[n2]
    if mesh.vert_he[m] == p1:
        mesh.vert_he[m] = n2

    if mapping is not None:
        start = time.perf_counter()
        if images is not None:
            mapping.rehost(images, f)
        mapping.place(v, f, coords_v)
        mapping.elapsed += time.perf_counter() - start
    return f


def repair_delaunay(mesh, log, mapping=None, tolerance=DELAUNAY_TOLERANCE):
    """Re-check the edges recorded in ``log`` newest first, flipping bad ones.

    Every flip queues the four edges of its two new triangles. The log is
    cleared afterwards; returns the number of repair flips.
    """
    edges = log.edges()
    log.clear()
    return flip_until_delaunay(mesh, edges, tolerance, mapping)


def _try_remove(mesh, v, config, mapping, log, report):
    """Attempt one removal; returns the failure reason or None."""
    if violates_valence_bound(mesh, v, boundary_merge=config.boundary_merge):
        return LOWER_BOUND
    n_before = len(log)
    reason = _reduce(mesh, v, log, mapping, config.max_flip_attempts_per_vertex,
                     config.boundary_merge)
    if reason is not None:
        return reason
    report.flips += len(log) - n_before
    j_k_l = [u for u in mesh.neighbors(v) if u != v]
    try:
        remove_prepared_vertex(mesh, v, mapping, log)
    except RemovalError as exc:
        undo_flips(mesh, log, mapping)
        return exc.reason
    report.flips += repair_delaunay(mesh, log, mapping, config.delaunay_tolerance)
    return j_k_l


def simplify(mesh, config, mapping=None):
    """Remove low-curvature vertices from ``mesh`` in place.

    Vertices are processed flattest first. A vertex is removed when it can
    be flipped down to valence 3 (2 on the boundary) and the remaining
    triangle is valid; otherwise its flips are undone and it is retried in
    the next round. Rounds stop when one of them removes nothing.

    Returns
    -------
    (SimplifyReport, BarycentricMapping or None)
    """
    t_start = time.perf_counter()
    if config.track_mappings and mapping is None:
        mapping = BarycentricMapping()
    if not config.track_mappings:
        mapping = None
    if mapping is not None:
        mapping.elapsed = 0.0

    report = SimplifyReport(kappa_max=config.kappa_max)
    report.vertices_before = mesh.n_vertices
    report.curvature_sum_before = mesh.curvature_sum()
    report.euler_before = mesh.euler_characteristic()
    report.boundary_loops_before = len(mesh.boundary_loops())

    if config.initial_delaunay:
        report.flips += flip_to_delaunay(mesh, config.delaunay_tolerance, mapping)

    tiebreak = None
    if config.seed is not None:
        order = list(range(mesh.n_vertex_slots))
        random.Random(config.seed).shuffle(order)
        tiebreak = order
    queue = CurvatureQueue(mesh, config.kappa_max, tiebreak)
    for v in mesh.vertices():
        if v in config.protected:
            continue
        if queue.push(v):
            report.removable += 1

    encountered = set()
    log = FlipLog()
    while True:
        report.rounds += 1
        deferred = []
        deferred_set = set()
        removed_this_round = 0
        while True:
            v = queue.pop()
            if v is None:
                break
            encountered.add(v)
            outcome = _try_remove(mesh, v, config, mapping, log, report)
            if isinstance(outcome, str):
                report.failures[outcome] += 1
                report.failed_vertices[v] = outcome
                deferred.append(v)
                deferred_set.add(v)
                continue
            report.removed += 1
            removed_this_round += 1
            report.failed_vertices.pop(v, None)
            for u in outcome:
                if u in config.protected or u in deferred_set or not mesh.vertex_alive(u):
                    continue
                queue.push(u)
        if removed_this_round == 0 or not deferred:
            break
        for v in deferred:
            if mesh.vertex_alive(v):
                queue.push(v)

    report.encountered = len(encountered)
    report.vertices_after = mesh.n_vertices
    report.curvature_sum_after = mesh.curvature_sum()
    report.euler_after = mesh.euler_characteristic()
    report.boundary_loops_after = len(mesh.boundary_loops())
    report.total_time = time.perf_counter() - t_start
    report.track_time = mapping.elapsed if mapping is not None else 0.0
    report.remove_time = report.total_time - report.track_time
    return report, mapping
