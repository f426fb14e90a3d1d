"""Intrinsic mesh simplification by flattest-first vertex removal.

The metric of a triangle mesh is kept as edge lengths on a Delta-complex.
Low-curvature vertices are flipped down to valence three (two on the
boundary) and removed, and every removed vertex is tracked by intrinsic
barycentric coordinates in the simplified mesh.
"""

from .correspondence import (
    BarycentricMapping,
    BarycentricPoint,
    ProjectionError,
    conformal_scale,
    project_removed_vertex,
    substitute_dependent,
)
from .flips import FlipLog, FlipRecord, flip_edge, flip_to_delaunay, is_delaunay, is_flippable, undo_flips
from .mesh import DegenerateFaceError, IntrinsicMesh, MeshError, NonManifoldError, build_from_extrinsic
from .poisson import (
    PoissonProblem,
    SolverError,
    cotan_laplacian,
    cotan_weights,
    interpolate_at_removed,
    mse_against_original,
    poisson_solve,
)
from .simplify import (
    CurvatureQueue,
    SimplifyConfig,
    SimplifyReport,
    reduce_to_removable_valence,
    remove_prepared_vertex,
    repair_delaunay,
    simplify,
)

__all__ = [
    "BarycentricMapping", "BarycentricPoint", "CurvatureQueue", "DegenerateFaceError", "FlipLog",
    "FlipRecord", "IntrinsicMesh", "MeshError", "NonManifoldError", "PoissonProblem",
    "ProjectionError", "SimplifyConfig", "SimplifyReport", "SolverError", "build_from_extrinsic",
    "conformal_scale", "cotan_laplacian", "cotan_weights", "flip_edge", "flip_to_delaunay",
    "interpolate_at_removed", "is_delaunay", "is_flippable", "mse_against_original",
    "poisson_solve", "project_removed_vertex", "reduce_to_removable_valence",
    "remove_prepared_vertex", "repair_delaunay", "simplify", "substitute_dependent", "undo_flips",
]
