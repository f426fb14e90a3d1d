"""Text formats: OBJ input/output, intrinsic meshes (ITM), mappings (MAP), stats CSV.

ITM layout::

    ITM 1
    n <vertex slots> <faces>
    f v0 v1 v2 tf0 ts0 tf1 ts1 tf2 ts2 l0 l1 l2

Faces are numbered by their order in the file. Side ``s`` runs from corner
``s`` to corner ``s + 1`` and is glued to side ``ts`` of face ``tf``
(``-1 -1`` on the boundary). Lengths use ``repr`` so they read back
bit-exactly. MAP files hold ``m <vertex> <face> <c0> <c1> <c2>`` lines whose
face ids refer to the rows of the accompanying ITM file. Scalar fields are
``<vertex> <value>`` lines, one per defined vertex.
"""

import csv
import math
from pathlib import Path

import numpy as np

from .correspondence import BarycentricMapping
from .mesh import IntrinsicMesh

ITM_HEADER = "ITM 1"
STATS_COLUMNS = (
    "mesh", "kappa_max", "vertices_before", "vertices_after", "removable_pct",
    "removed_pct", "remove_time", "track_time", "total_time",
)


class FormatError(ValueError):
    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


def _content_lines(path):
    with open(path, encoding="utf-8") as fh:
        for number, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield number, line


# ----------------------------------------------------------------------
# OBJ


def _obj_index(token, n_positions, path, number):
    head = token.split("/", 1)[0]
    try:
        k = int(head)
    except ValueError:
        raise FormatError(path, number, f"bad vertex reference {token!r}") from None
    if k < 0:
        k += n_positions  # relative index
    else:
        k -= 1
    if not 0 <= k < n_positions:
        raise FormatError(path, number, f"vertex reference {token!r} out of range")
    return k


def load_obj(path):
    """Positions and 0-based triangles of an ASCII OBJ file.

    Only ``v`` and ``f`` records are interpreted; texture coordinates,
    normals and other records are ignored.

    Raises
    ------
    FormatError
        On a malformed record or a face that is not a triangle; the message
        names the line.
    """
    positions = []
    faces = []
    for number, line in _content_lines(path):
        tokens = line.split()
        tag = tokens[0]
        if tag == "v":
            if len(tokens) < 4:
                raise FormatError(path, number, "vertex record needs three coordinates")
            try:
                positions.append(tuple(float(x) for x in tokens[1:4]))
            except ValueError:
                raise FormatError(path, number, f"bad coordinate in {line!r}") from None
        elif tag == "f":
            if len(tokens) != 4:
                raise FormatError(
                    path, number, f"face with {len(tokens) - 1} corners; only triangles are supported"
                )
            faces.append(tuple(_obj_index(t, len(positions), path, number) for t in tokens[1:]))
    return positions, faces


def write_obj(path, positions, faces):
    with open(path, "w", encoding="utf-8") as fh:
        for p in positions:
            fh.write("v {!r} {!r} {!r}\n".format(*(float(x) for x in p)))
        for f in faces:
            fh.write("f {} {} {}\n".format(*(v + 1 for v in f)))


# ----------------------------------------------------------------------
# ITM / MAP


def write_itm(path, mesh):
    """Write ``mesh``; returns the list mapping file rows to face ids."""
    n_slots, faces, twins, lengths, face_ids = mesh.to_face_tables()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{ITM_HEADER}\n")
        fh.write(f"n {n_slots} {len(faces)}\n")
        for corners, glued, sides in zip(faces, twins, lengths):
            refs = []
            for g in glued:
                refs.extend(g if g is not None else (-1, -1))
            fh.write("f {} {} {} {} {} {} {} {} {} {!r} {!r} {!r}\n".format(*corners, *refs, *sides))
    return face_ids


def load_itm(path):
    lines = _content_lines(path)
    try:
        number, header = next(lines)
    except StopIteration:
        raise FormatError(path, 1, "empty file") from None
    if header != ITM_HEADER:
        raise FormatError(path, number, f"expected header {ITM_HEADER!r}, got {header!r}")
    n_slots = n_faces = None
    faces, twins, lengths = [], [], []
    for number, line in lines:
        tokens = line.split()
        try:
            if tokens[0] == "n" and len(tokens) == 3:
                n_slots, n_faces = int(tokens[1]), int(tokens[2])
            elif tokens[0] == "f" and len(tokens) == 13:
                ints = [int(t) for t in tokens[1:10]]
                faces.append(tuple(ints[:3]))
                twins.append(tuple(
                    None if ints[3 + 2 * s] == -1 else (ints[3 + 2 * s], ints[4 + 2 * s])
                    for s in range(3)
                ))
                lengths.append(tuple(float(t) for t in tokens[10:13]))
            else:
                raise ValueError
        except ValueError:
            raise FormatError(path, number, f"malformed record {line!r}") from None
    if n_slots is None:
        raise FormatError(path, 2, "missing 'n' record")
    if n_faces != len(faces):
        raise FormatError(path, number, f"expected {n_faces} faces, found {len(faces)}")
    return IntrinsicMesh.from_face_tables(n_slots, faces, twins, lengths)


def write_map(path, mapping, face_ids):
    """Write ``mapping`` with host faces renumbered to ITM rows (``face_ids``)."""
    row = {f: i for i, f in enumerate(face_ids)}
    with open(path, "w", encoding="utf-8") as fh:
        for v in sorted(mapping.points):
            point = mapping.points[v]
            fh.write("m {} {} {!r} {!r} {!r}\n".format(v, row[point.face], *point.coords))


def load_map(path, mesh=None, tol=1e-9):
    mapping = BarycentricMapping()
    for number, line in _content_lines(path):
        tokens = line.split()
        if tokens[0] != "m" or len(tokens) != 6:
            raise FormatError(path, number, f"malformed record {line!r}")
        try:
            v, f = int(tokens[1]), int(tokens[2])
            coords = tuple(float(t) for t in tokens[3:])
        except ValueError:
            raise FormatError(path, number, f"malformed record {line!r}") from None
        if abs(sum(coords) - 1.0) > tol:
            raise FormatError(path, number, f"coordinates of vertex {v} do not sum to 1")
        if mesh is not None and not mesh.face_alive(f):
            raise FormatError(path, number, f"host face {f} is not in the mesh")
        if v in mapping:
            raise FormatError(path, number, f"vertex {v} mapped twice")
        mapping.place(v, f, coords)
    return mapping


def save_result(prefix, mesh, mapping=None):
    """Write ``prefix.itm`` and, when given, ``prefix.map``; returns the paths."""
    prefix = Path(prefix)
    itm = prefix.with_suffix(".itm")
    face_ids = write_itm(itm, mesh)
    paths = [itm]
    if mapping is not None:
        mp = prefix.with_suffix(".map")
        write_map(mp, mapping, face_ids)
        paths.append(mp)
    return paths


# ----------------------------------------------------------------------
# scalar fields


def write_field(path, field):
    """Write the non-NaN entries of a slot-indexed ``field``."""
    with open(path, "w", encoding="utf-8") as fh:
        for v, value in enumerate(field):
            if not math.isnan(value):
                fh.write(f"{v} {float(value)!r}\n")


def load_field(path, n_slots=None):
    """Read a field file into a slot-indexed array, NaN where undefined."""
    entries = {}
    for number, line in _content_lines(path):
        tokens = line.split()
        try:
            if len(tokens) != 2:
                raise ValueError
            v, value = int(tokens[0]), float(tokens[1])
        except ValueError:
            raise FormatError(path, number, f"malformed record {line!r}") from None
        if v < 0 or (n_slots is not None and v >= n_slots):
            raise FormatError(path, number, f"vertex {v} out of range")
        if v in entries:
            raise FormatError(path, number, f"vertex {v} listed twice")
        entries[v] = value
    size = n_slots if n_slots is not None else max(entries, default=-1) + 1
    field = np.full(size, np.nan)
    for v, value in entries.items():
        field[v] = value
    return field


# ----------------------------------------------------------------------
# stats


def stats_row(name, report):
    return {
        "mesh": name,
        "kappa_max": repr(float(report.kappa_max)),
        "vertices_before": report.vertices_before,
        "vertices_after": report.vertices_after,
        "removable_pct": repr(report.removable_pct),
        "removed_pct": repr(report.removed_pct),
        "remove_time": repr(report.remove_time),
        "track_time": repr(report.track_time),
        "total_time": repr(report.total_time),
    }


def write_stats_csv(path_or_file, rows):
    own = isinstance(path_or_file, (str, Path))
    fh = open(path_or_file, "w", newline="", encoding="utf-8") if own else path_or_file
    try:
        writer = csv.DictWriter(fh, fieldnames=STATS_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if own:
            fh.close()


def read_stats_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
