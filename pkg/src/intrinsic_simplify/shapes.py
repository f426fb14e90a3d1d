"""Synthetic triangle meshes as ``(positions, faces)`` pairs.

All faces are counter-clockwise when seen from outside (or from +z for
height fields).
"""

import math

import numpy as np


def _grid_faces(nx, ny, index, wrap_x=False):
    """Faces of an ``nx`` by ``ny`` vertex grid, each quad split on one diagonal."""
    faces = []
    cols = nx if wrap_x else nx - 1
    for j in range(ny - 1):
        for i in range(cols):
            i1 = (i + 1) % nx
            a, b, c, d = index(i, j), index(i1, j), index(i1, j + 1), index(i, j + 1)
            faces.append((a, b, c))
            faces.append((a, c, d))
    return faces


def height_field(nx, ny, height=None, size=(1.0, 1.0)):
    xs = np.linspace(0.0, size[0], nx)
    ys = np.linspace(0.0, size[1], ny)
    positions = []
    for y in ys:
        for x in xs:
            z = 0.0 if height is None else float(height(x, y))
            positions.append((float(x), float(y), z))
    return positions, _grid_faces(nx, ny, lambda i, j: j * nx + i)


def plane_grid(nx, ny, size=(1.0, 1.0)):
    return height_field(nx, ny, None, size)


def noisy_plane(nx, ny, amplitude=1e-3, seed=0):
    rng = np.random.default_rng(seed)
    noise = rng.uniform(-amplitude, amplitude, size=nx * ny)
    positions, faces = plane_grid(nx, ny)
    positions = [(x, y, float(noise[k])) for k, (x, y, _) in enumerate(positions)]
    return positions, faces


def saddle(nx, ny, scale=0.5):
    return height_field(nx, ny, lambda x, y: scale * ((x - 0.5) ** 2 - (y - 0.5) ** 2))


def sine_surface(nx, ny, amplitude=0.1, waves=1.0):
    """Sine bump over the middle of a flat sheet, flat near the rim."""
    def height(x, y):
        r = math.hypot(x - 0.5, y - 0.5)
        if r >= 0.35:
            return 0.0
        return amplitude * (1.0 + math.cos(math.pi * r / 0.35)) * 0.5 * math.cos(2 * math.pi * waves * r)
    return height_field(nx, ny, height)


def strip(n, width=0.1, length=1.0):
    """A two-row boundary strip."""
    return plane_grid(n, 2, size=(length, width))


def cylinder(n_around, n_rings, radius=1.0, height=2.0):
    """Open (cap-less) cylinder with two boundary loops."""
    positions = []
    for j in range(n_rings):
        z = height * j / (n_rings - 1)
        for i in range(n_around):
            t = 2.0 * math.pi * i / n_around
            positions.append((radius * math.cos(t), radius * math.sin(t), z))
    faces = _grid_faces(n_around, n_rings, lambda i, j: j * n_around + i, wrap_x=True)
    return positions, faces


def cone(n_around, n_rings, radius=1.0, height=1.0):
    """Cone surface with its apex and an open base rim."""
    positions = [(0.0, 0.0, height)]
    for j in range(1, n_rings + 1):
        r = radius * j / n_rings
        z = height * (1.0 - j / n_rings)
        for i in range(n_around):
            t = 2.0 * math.pi * i / n_around
            positions.append((r * math.cos(t), r * math.sin(t), z))
    faces = [(0, 1 + (i + 1) % n_around, 1 + i) for i in range(n_around)]
    faces += _grid_faces(n_around, n_rings, lambda i, j: 1 + j * n_around + i, wrap_x=True)
    return positions, faces


def torus(n_major, n_minor, major=1.0, minor=0.35):
    positions = []
    for j in range(n_minor):
        p = 2.0 * math.pi * j / n_minor
        for i in range(n_major):
            t = 2.0 * math.pi * i / n_major
            rr = major + minor * math.cos(p)
            positions.append((rr * math.cos(t), rr * math.sin(t), minor * math.sin(p)))
    faces = []
    for j in range(n_minor):
        j1 = (j + 1) % n_minor
        for i in range(n_major):
            i1 = (i + 1) % n_major
            a, b = j * n_major + i, j * n_major + i1
            c, d = j1 * n_major + i1, j1 * n_major + i
            faces.append((a, b, c))
            faces.append((a, c, d))
    return positions, faces


def icosahedron():
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    positions = [
        (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
        (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
        (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
    ]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    return [tuple(map(float, p)) for p in positions], faces


def icosphere(subdivisions=2, radius=1.0):
    positions, faces = icosahedron()
    positions = [tuple(np.asarray(p) / np.linalg.norm(p)) for p in positions]
    for _ in range(subdivisions):
        cache = {}
        new_faces = []

        def midpoint(a, b):
            key = (a, b) if a < b else (b, a)
            if key not in cache:
                m = (np.asarray(positions[a]) + np.asarray(positions[b])) / 2.0
                positions.append(tuple(m / np.linalg.norm(m)))
                cache[key] = len(positions) - 1
            return cache[key]

        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    return [tuple(float(radius * x) for x in p) for p in positions], faces


def tetrahedron():
    positions = [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]
    faces = [(0, 1, 2), (0, 3, 1), (0, 2, 3), (1, 3, 2)]
    return [tuple(map(float, p)) for p in positions], faces


def pillow():
    """Two triangles glued along all three sides (a Delta-complex sphere)."""
    positions = [(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.4, 0.8, 0.0)]
    return positions, [(0, 1, 2), (0, 2, 1)]


def capsule(n_around, n_rings, n_cap, radius=1.0, height=2.0):
    """Closed cylinder with hemispherical caps; flat sides, curved ends."""
    positions = []
    rings = []
    for k in range(1, n_cap + 1):  # bottom cap rings, pole excluded
        phi = -0.5 * math.pi + 0.5 * math.pi * k / n_cap
        rings.append((radius * math.cos(phi), radius * math.sin(phi)))
    for j in range(1, n_rings):
        rings.append((radius, height * j / n_rings))
    for k in range(n_cap):
        phi = 0.5 * math.pi * k / n_cap
        rings.append((radius * math.cos(phi), height + radius * math.sin(phi)))
    for r, z in rings:
        for i in range(n_around):
            t = 2.0 * math.pi * i / n_around
            positions.append((r * math.cos(t), r * math.sin(t), z))
    n_ring = len(rings)
    faces = _grid_faces(n_around, n_ring, lambda i, j: j * n_around + i, wrap_x=True)
    bottom = len(positions)
    positions.append((0.0, 0.0, -radius))
    top = len(positions)
    positions.append((0.0, 0.0, height + radius))
    last = (n_ring - 1) * n_around
    for i in range(n_around):
        i1 = (i + 1) % n_around
        faces.append((bottom, i1, i))
        faces.append((top, last + i, last + i1))
    return positions, faces


def saddle_fan(n=8, height=0.5237, radius=1.0):
    """Single fan whose centre has a strongly negative angle defect.

    Rim vertices alternate between +height and -height, which pushes the
    cone angle at the centre well past 2pi.
    """
    positions = [(0.0, 0.0, 0.0)]
    for i in range(n):
        t = 2.0 * math.pi * i / n
        positions.append((radius * math.cos(t), radius * math.sin(t), height if i % 2 == 0 else -height))
    faces = [(0, 1 + i, 1 + (i + 1) % n) for i in range(n)]
    return positions, faces


def synthetic_corpus():
    """Named small meshes covering flat, developable, curved and Delta-complex cases."""
    return {
        "plane_grid": plane_grid(12, 12),
        "cylinder": cylinder(16, 10),
        "cone": cone(16, 8),
        "icosphere": icosphere(2),
        "saddle": saddle(12, 12),
        "noisy_plane": noisy_plane(12, 12),
        "torus": torus(24, 12),
        "pillow": pillow(),
        "boundary_strip": strip(20),
        "tetrahedron": tetrahedron(),
        "sine_surface": sine_surface(16, 16),
        "capsule": capsule(16, 8, 4),
    }
