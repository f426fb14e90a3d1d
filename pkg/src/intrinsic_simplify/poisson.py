"""Cotan-Laplacian Poisson problems on intrinsic meshes.

Used to measure how much a simplified metric deviates from the original:
solve a spike problem on both meshes, interpolate the coarse solution at the
removed vertices and compare.

Fields are numpy arrays indexed by vertex slot, with NaN at dead slots.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg

SOLVER_TOLERANCE = 1e-10


class SolverError(RuntimeError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (relative residual {residual:.3e})")
        self.residual = residual


@dataclass
class PoissonProblem:
    """Unit spike at ``source``, balanced so the system is solvable.

    ``balance="area"`` spreads the compensating sink proportionally to vertex
    area (a uniform density on the surface); ``"uniform"`` puts ``-1/V`` on
    every vertex.
    """

    source: int
    magnitude: float = 1.0
    mean_zero: bool = True
    balance: str = "area"

    def __post_init__(self):
        if self.balance not in ("area", "uniform"):
            raise ValueError(f"unknown balance {self.balance!r}")


def _cot(a, b, opposite, area):
    # cot of the angle between sides a and b
    return (a * a + b * b - opposite * opposite) / (4.0 * area)


def cotan_weights(mesh):
    """Per-edge cotan weights ``(cot alpha + cot beta) / 2``.

    Boundary edges get the single term. Returns an array over edge slots,
    zero for dead edges.
    """
    w = np.zeros(len(mesh.edge_he))
    ln = mesh.length
    he = mesh.he_edge
    nxt = mesh.he_next
    for f in mesh.faces():
        h0 = mesh.face_he[f]
        h1 = nxt[h0]
        h2 = nxt[h1]
        e0, e1, e2 = he[h0], he[h1], he[h2]
        l0, l1, l2 = ln[e0], ln[e1], ln[e2]
        area = mesh.face_area(f)
        # side k is opposite the corner where the other two sides meet
        w[e0] += 0.5 * _cot(l1, l2, l0, area)
        w[e1] += 0.5 * _cot(l2, l0, l1, area)
        w[e2] += 0.5 * _cot(l0, l1, l2, area)
    return w


def vertex_index(mesh):
    """Compact row index for live vertices: (slot -> row array, row -> slot array)."""
    live = np.array(mesh.vertices(), dtype=np.int64)
    rows = np.full(mesh.n_vertex_slots, -1, dtype=np.int64)
    rows[live] = np.arange(len(live))
    return rows, live


def vertex_areas(mesh):
    """Barycentric vertex areas over vertex slots."""
    areas = np.zeros(mesh.n_vertex_slots)
    for f in mesh.faces():
        a = mesh.face_area(f) / 3.0
        for v in mesh.face_vertices(f):
            areas[v] += a
    return areas


def cotan_laplacian(mesh, weights=None):
    """Positive semi-definite cotan Laplacian over live vertices (compact rows).

    Self-edges contribute nothing, since ``u_i - u_i`` vanishes.
    """
    if weights is None:
        weights = cotan_weights(mesh)
    rows, live = vertex_index(mesh)
    edges = np.array(mesh.edges(), dtype=np.int64)
    ends = np.array([mesh.edge_vertices(e) for e in edges], dtype=np.int64).reshape(-1, 2)
    i = rows[ends[:, 0]]
    j = rows[ends[:, 1]]
    w = weights[edges]
    keep = i != j
    i, j, w = i[keep], j[keep], w[keep]
    n = len(live)
    off = sp.coo_matrix((np.concatenate([-w, -w]), (np.concatenate([i, j]), np.concatenate([j, i]))),
                        shape=(n, n)).tocsr()
    diag = -np.asarray(off.sum(axis=1)).ravel()
    return (off + sp.diags(diag)).tocsr()


def poisson_solve(mesh, problem, tol=SOLVER_TOLERANCE, maxiter=None):
    """Solve ``L u = b`` for a spike right-hand side.

    The pure-Neumann system is singular; the balanced right-hand side lies in
    its range, and the returned solution is shifted to zero (area-weighted)
    mean when ``problem.mean_zero`` is set.

    Raises
    ------
    SolverError
        If conjugate gradients do not reach relative residual ``tol``.
    """
    if not mesh.vertex_alive(problem.source):
        raise ValueError(f"source vertex {problem.source} is not live")
    rows, live = vertex_index(mesh)
    n = len(live)
    L = cotan_laplacian(mesh)
    areas = vertex_areas(mesh)[live]
    b = np.zeros(n)
    b[rows[problem.source]] = 1.0
    if problem.balance == "area":
        b -= areas / areas.sum()
    else:
        b -= 1.0 / n
    b *= problem.magnitude

    field = np.full(mesh.n_vertex_slots, np.nan)
    b_norm = np.linalg.norm(b)
    if b_norm == 0.0:
        field[live] = 0.0
        return field

    diag = L.diagonal()
    M = sp.diags(np.where(diag > 0.0, 1.0 / np.where(diag > 0.0, diag, 1.0), 1.0))
    if maxiter is None:
        maxiter = max(10 * n, 1000)
    u, _ = cg(L, b, rtol=tol, atol=0.0, maxiter=maxiter, M=M)
    residual = np.linalg.norm(L @ u - b) / b_norm
    if not residual <= tol * 10.0:
        raise SolverError("conjugate gradients did not converge", residual)
    if problem.mean_zero:
        u = u - np.dot(areas, u) / areas.sum()
    field[live] = u
    return field


def interpolate_at_removed(mapping, mesh, field):
    """Values of ``field`` at removed vertices from their host-face barycentrics."""
    values = {}
    for v, point in mapping.items():
        corners = mesh.face_vertices(point.face)
        c = point.coords
        values[v] = c[0] * field[corners[0]] + c[1] * field[corners[1]] + c[2] * field[corners[2]]
    return values


def mse_against_original(original, simplified, interpolated=None, vertices=None):
    """Mean squared difference over the original vertices.

    ``original`` and ``simplified`` are slot-indexed fields; removed vertices
    take their value from ``interpolated`` (vertex -> value). ``vertices``
    defaults to the non-NaN slots of ``original``.
    """
    original = np.asarray(original, dtype=float)
    if vertices is None:
        vertices = np.flatnonzero(~np.isnan(original))
    vertices = np.asarray(vertices, dtype=np.int64)
    full = np.array(simplified, dtype=float, copy=True)
    if len(full) < len(original):
        full = np.concatenate([full, np.full(len(original) - len(full), np.nan)])
    for v, value in (interpolated or {}).items():
        full[v] = value
    diff = original[vertices] - full[vertices]
    if np.isnan(diff).any():
        raise ValueError("simplified field is missing values at some original vertices")
    return float(np.mean(diff * diff)) if len(diff) else 0.0
