"""Analytic test shapes and the standard verification corpus.

All generators return :class:`~helfrich.mesh.TriMesh` with outward
orientation. Spheres come in two subdivision families: the icosahedral one
(most uniform triangles) and the octahedral one, whose equator is an exact
polygon of mesh edges at z = 0; use the latter for hemisphere phase
splits.
"""

from __future__ import annotations

import numpy as np

from .mesh import TriMesh

__all__ = [
    "icosphere",
    "octasphere",
    "cube",
    "tetrahedron",
    "octahedron",
    "torus",
    "capsule",
    "flat_patch",
    "jittered",
    "equator_phase_labels",
    "two_spheres_touching",
    "standard_corpus",
]

_PHI = (1.0 + np.sqrt(5.0)) / 2.0

_ICO_VERTS = np.array(
    [
        (-1, _PHI, 0), (1, _PHI, 0), (-1, -_PHI, 0), (1, -_PHI, 0),
        (0, -1, _PHI), (0, 1, _PHI), (0, -1, -_PHI), (0, 1, -_PHI),
        (_PHI, 0, -1), (_PHI, 0, 1), (-_PHI, 0, -1), (-_PHI, 0, 1),
    ],
    dtype=np.float64,
)

_ICO_FACES = np.array(
    [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ],
    dtype=np.int64,
)


def _subdivide_on_sphere(verts, faces, levels, radius):
    verts = [tuple(p) for p in verts / np.linalg.norm(verts, axis=1, keepdims=True)]
    for _ in range(levels):
        cache = {}
        new_faces = []

        def midpoint(a, b):
            key = (a, b) if a < b else (b, a)
            if key not in cache:
                p = np.add(verts[a], verts[b])
                verts.append(tuple(p / np.linalg.norm(p)))
                cache[key] = len(verts) - 1
            return cache[key]

        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces.extend([(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)])
        faces = new_faces
    v = radius * np.asarray(verts)
    return TriMesh(v, np.asarray(faces, dtype=np.int64))


def icosphere(level=3, radius=1.0):
    """Icosahedral sphere subdivision: 20 * 4**level faces, all on the sphere."""
    return _subdivide_on_sphere(_ICO_VERTS, [tuple(f) for f in _ICO_FACES], level, radius)


def octasphere(level=3, radius=1.0):
    """Octahedral sphere subdivision; the equator z = 0 is an edge polygon."""
    verts = np.array(
        [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)], dtype=np.float64
    )
    faces = [(0, 2, 4), (2, 1, 4), (1, 3, 4), (3, 0, 4), (2, 0, 5), (1, 2, 5), (3, 1, 5), (0, 3, 5)]
    return _subdivide_on_sphere(verts, faces, level, radius)


def octahedron(radius=1.0):
    return octasphere(level=0, radius=radius)


def cube(edge=1.0):
    """Axis-aligned cube surface of 12 triangles, centered at the origin."""
    s = edge / 2.0
    corners = np.array(
        [(x, y, z) for x in (-s, s) for y in (-s, s) for z in (-s, s)], dtype=np.float64
    )
    quads = [
        (0, 1, 3, 2), (4, 6, 7, 5), (0, 4, 5, 1), (2, 3, 7, 6), (0, 2, 6, 4), (1, 5, 7, 3),
    ]
    faces = []
    for a, b, c, d in quads:
        faces.extend([(a, b, c), (a, c, d)])
    return TriMesh(corners, np.array(faces, dtype=np.int64))


def tetrahedron(edge=1.0):
    """Regular tetrahedron with the given edge length."""
    v = np.array([(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)], dtype=np.float64)
    v *= edge / np.sqrt(8.0)
    faces = np.array([(0, 2, 1), (0, 1, 3), (0, 3, 2), (1, 2, 3)], dtype=np.int64)
    return TriMesh(v, faces)


def torus(big_radius=2.0, small_radius=1.0, n_u=64, n_v=32):
    """Torus of revolution around the z-axis, outward orientation."""
    u = 2 * np.pi * np.arange(n_u) / n_u
    w = 2 * np.pi * np.arange(n_v) / n_v
    uu, ww = np.meshgrid(u, w, indexing="ij")
    r = big_radius + small_radius * np.cos(ww)
    verts = np.column_stack(
        [(r * np.cos(uu)).ravel(), (r * np.sin(uu)).ravel(), (small_radius * np.sin(ww)).ravel()]
    )
    faces = []
    for i in range(n_u):
        for j in range(n_v):
            a = i * n_v + j
            b = ((i + 1) % n_u) * n_v + j
            c = ((i + 1) % n_u) * n_v + (j + 1) % n_v
            d = i * n_v + (j + 1) % n_v
            faces.extend([(a, b, c), (a, c, d)])
    return TriMesh(verts, np.array(faces, dtype=np.int64))


def capsule(radius=0.5, cylinder_length=9.0, n_around=32, n_cap=8, n_length=48):
    """Cylinder with hemispherical caps, axis along z, centered at the origin.

    Defaults give a needle of total length 10 and aspect ratio 10.
    """
    rows = []
    half = cylinder_length / 2.0
    # south cap (excluding pole), cylinder wall, north cap (excluding pole)
    for i in range(1, n_cap + 1):
        ang = np.pi / 2 * i / n_cap
        rows.append((radius * np.sin(ang), -half - radius * np.cos(ang)))
    for i in range(1, n_length):
        rows.append((radius, -half + cylinder_length * i / n_length))
    for i in range(n_cap, 0, -1):
        ang = np.pi / 2 * i / n_cap
        rows.append((radius * np.sin(ang), half + radius * np.cos(ang)))
    phi = 2 * np.pi * np.arange(n_around) / n_around
    ring = np.column_stack([np.cos(phi), np.sin(phi)])
    verts = [(0.0, 0.0, -half - radius)]
    for rho, z in rows:
        verts.extend((rho * c, rho * s, z) for c, s in ring)
    verts.append((0.0, 0.0, half + radius))
    verts = np.array(verts, dtype=np.float64)
    faces = []
    for k in range(n_around):
        faces.append((0, 1 + (k + 1) % n_around, 1 + k))
    for r0 in range(len(rows) - 1):
        base0 = 1 + r0 * n_around
        base1 = base0 + n_around
        for k in range(n_around):
            k1 = (k + 1) % n_around
            faces.append((base0 + k, base0 + k1, base1 + k1))
            faces.append((base0 + k, base1 + k1, base1 + k))
    top = len(verts) - 1
    base = 1 + (len(rows) - 1) * n_around
    for k in range(n_around):
        faces.append((top, base + k, base + (k + 1) % n_around))
    return TriMesh(verts, np.array(faces, dtype=np.int64))


def flat_patch(n=8, spacing=0.25):
    """Open square patch (equilateral-triangle rows); tests only.

    Interior vertices have perfectly symmetric one-rings, so flat-geometry
    identities hold to rounding.
    """
    dy = spacing * np.sqrt(3.0) / 2.0
    verts = []
    index = {}
    for j in range(n + 1):
        for i in range(n + 1):
            x = (i + (0.5 if j % 2 else 0.0)) * spacing
            index[(i, j)] = len(verts)
            verts.append((x, j * dy, 0.0))
    faces = []
    for j in range(n):
        for i in range(n):
            a, b = index[(i, j)], index[(i + 1, j)]
            c, d = index[(i, j + 1)], index[(i + 1, j + 1)]
            if j % 2 == 0:
                faces.extend([(a, b, c), (b, d, c)])
            else:
                faces.extend([(a, b, d), (a, d, c)])
    return TriMesh(np.array(verts), np.array(faces, dtype=np.int64), allow_boundary=True)


def jittered(mesh, amplitude, seed=0):
    """Mesh with vertices displaced by iid normal noise of the given amplitude."""
    rng = np.random.default_rng(seed)
    return mesh.with_vertices(mesh.vertices + amplitude * rng.standard_normal(mesh.vertices.shape))


def equator_phase_labels(mesh):
    """Two-phase face labels: 1 above z = 0, 2 below (by face centroid)."""
    centroids = mesh.vertices[mesh.faces].mean(axis=1)
    return np.where(centroids[:, 2] > 0.0, 1, 2).astype(np.int64)


def two_spheres_touching(level=3, radius=1.0):
    """Two spheres tangent at the origin (one mesh, two components).

    Octahedral spheres carry their poles as vertices, so the tangent point
    is an exact vertex of both components: point multiplicity two.
    """
    a = octasphere(level, radius)
    b = octasphere(level, radius)
    va = a.vertices + np.array([0.0, 0.0, radius])
    vb = b.vertices - np.array([0.0, 0.0, radius])
    faces = np.vstack([a.faces, b.faces + len(va)])
    return TriMesh(np.vstack([va, vb]), faces)


def standard_corpus():
    """The shipped verification corpus: name -> (mesh, phase labels or None)."""
    corpus = {}
    for level in (2, 3, 4):
        corpus[f"icosphere{level}"] = (icosphere(level), None)
    corpus["torus"] = (torus(2.0, 1.0, 64, 32), None)
    corpus["capsule"] = (capsule(), None)
    corpus["perturbed_sphere"] = (jittered(icosphere(3), 0.01, seed=7), None)
    split = octasphere(4)
    corpus["split_sphere"] = (split, equator_phase_labels(split))
    return corpus
