"""Closed oriented triangle meshes with half-edge connectivity.

The mesh is the discrete carrier of a closed oriented surface: faces are
counterclockwise when seen from outside, every edge is shared by exactly
two faces with opposite traversal, and validation fails rather than
repairs. Vertices are immutable after construction; moving vertices means
building a new mesh (see :meth:`TriMesh.with_vertices`, which reuses the
connectivity).
"""

from __future__ import annotations

import numpy as np

from .errors import (
    DegenerateFace,
    IndexOutOfRange,
    InconsistentOrientation,
    NonManifold,
)

__all__ = ["TriMesh", "build_mesh", "enclosed_volume", "diameter"]

# Face area below AREA_EPS_FACTOR * bbox_diag^2 counts as degenerate.
AREA_EPS_FACTOR = 1e-12


class TriMesh:
    """Validated triangle mesh with half-edge adjacency.

    Parameters
    ----------
    vertices : (V, 3) array_like
        Vertex positions.
    faces : (F, 3) array_like
        Vertex index triples, counterclockwise seen from outside.
    allow_boundary : bool
        Accept boundary edges (exactly one incident face). Off by default;
        open patches are only meant for tests.

    Raises
    ------
    NonManifold, InconsistentOrientation, DegenerateFace, IndexOutOfRange
    """

    def __init__(self, vertices, faces, allow_boundary=False):
        v = np.ascontiguousarray(vertices, dtype=np.float64)
        f = np.ascontiguousarray(faces, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise IndexOutOfRange(f"vertices must be (V, 3), got {v.shape}")
        if f.ndim != 2 or f.shape[1] != 3:
            raise IndexOutOfRange(f"faces must be (F, 3), got {f.shape}")
        if not np.isfinite(v).all():
            raise DegenerateFace("non-finite vertex coordinates")
        self.vertices = v
        self.faces = f
        self.allow_boundary = bool(allow_boundary)
        self._validate_indices()
        self._build_half_edges()
        self._validate_vertex_links()
        self._validate_face_areas()
        self.vertices.setflags(write=False)
        self.faces.setflags(write=False)

    # -- construction -----------------------------------------------------

    def _validate_indices(self):
        v, f = self.vertices, self.faces
        if f.size and (f.min() < 0 or f.max() >= len(v)):
            raise IndexOutOfRange("face index out of range")
        if len(f) == 0:
            raise IndexOutOfRange("mesh has no faces")
        referenced = np.zeros(len(v), dtype=bool)
        referenced[f.ravel()] = True
        if not referenced.all():
            missing = np.flatnonzero(~referenced)[:8]
            raise IndexOutOfRange(f"unreferenced vertices: {missing.tolist()}")
        if (f[:, 0] == f[:, 1]).any() or (f[:, 1] == f[:, 2]).any() or (f[:, 2] == f[:, 0]).any():
            raise DegenerateFace("face with repeated vertex")
        key = np.sort(f, axis=1)
        _, counts = np.unique(key, axis=0, return_counts=True)
        if (counts > 1).any():
            raise NonManifold("duplicated face (same vertex triple)")

    def _build_half_edges(self):
        """Half-edge h = 3*face + corner; origin faces[f, c], dest faces[f, (c+1)%3]."""
        f = self.faces
        nf = len(f)
        nh = 3 * nf
        origin = f[:, [0, 1, 2]].ravel()
        dest = f[:, [1, 2, 0]].ravel()
        # directed edge must be unique, undirected edge must appear 1 or 2 times
        lo = np.minimum(origin, dest)
        hi = np.maximum(origin, dest)
        und = lo.astype(np.int64) * len(self.vertices) + hi
        order = np.argsort(und, kind="stable")
        und_s = und[order]
        grp = np.flatnonzero(np.diff(und_s) != 0)
        starts = np.concatenate([[0], grp + 1])
        ends = np.concatenate([grp + 1, [len(und_s)]])
        sizes = ends - starts
        if (sizes > 2).any():
            raise NonManifold("edge with more than two incident faces")
        twin = np.full(nh, -1, dtype=np.int64)
        pair = starts[sizes == 2]
        h1 = order[pair]
        h2 = order[pair + 1]
        if (origin[h1] == origin[h2]).any():
            raise InconsistentOrientation("shared edge traversed twice in the same direction")
        twin[h1] = h2
        twin[h2] = h1
        if not self.allow_boundary and (twin < 0).any():
            raise NonManifold("boundary edge in closed mesh")
        self.half_edge_origin = origin
        self.half_edge_dest = dest
        self.half_edge_twin = twin
        self.half_edge_face = np.repeat(np.arange(nf, dtype=np.int64), 3)
        nxt = np.arange(nh, dtype=np.int64).reshape(nf, 3)[:, [1, 2, 0]].ravel()
        self.half_edge_next = nxt
        # unique undirected edges, and the faces on each side
        rep = order[starts]
        self.edges = np.column_stack([lo[rep], hi[rep]])
        ef = np.full((len(rep), 2), -1, dtype=np.int64)
        ef[:, 0] = self.half_edge_face[rep]
        second = np.full(len(rep), -1, dtype=np.int64)
        second[sizes == 2] = order[starts[sizes == 2] + 1]
        ef[sizes == 2, 1] = self.half_edge_face[second[sizes == 2]]
        self.edge_faces = ef
        self._edge_of_halfedge = np.empty(nh, dtype=np.int64)
        eid = np.repeat(np.arange(len(rep), dtype=np.int64), sizes)
        self._edge_of_halfedge[order] = eid

    def _validate_vertex_links(self):
        """Each vertex star must be a single half-edge fan (no pinch points)."""
        nv = len(self.vertices)
        valence = np.bincount(self.half_edge_origin, minlength=nv)
        out_he = np.full(nv, -1, dtype=np.int64)
        out_he[self.half_edge_origin[::-1]] = np.arange(len(self.half_edge_origin) - 1, -1, -1)
        twin, nxt = self.half_edge_twin, self.half_edge_next
        boundary_vertices = []
        for v in range(nv):
            h0 = out_he[v]
            seen = 1
            h = h0
            hit_boundary = False
            for _ in range(valence[v]):
                t = twin[nxt[nxt[h]]]  # next outgoing half-edge, counterclockwise
                if t < 0:
                    hit_boundary = True
                    break
                if t == h0:
                    break
                h = t
                seen += 1
            if hit_boundary:
                # walk the other way to cover the full open fan
                h = h0
                while True:
                    t = twin[h]
                    if t < 0:
                        break
                    h = nxt[t]
                    if h == h0:
                        break
                    seen += 1
                boundary_vertices.append(v)
            if seen != valence[v]:
                raise NonManifold(f"pinched vertex {v}: star is not a single fan")
        self.boundary_vertices = np.array(sorted(boundary_vertices), dtype=np.int64)

    def _validate_face_areas(self):
        eps = AREA_EPS_FACTOR * self.bbox_diagonal**2
        if (self.face_areas() <= eps).any():
            bad = int(np.argmin(self.face_areas()))
            raise DegenerateFace(f"face {bad} has area <= {eps:g}")

    # -- basic queries -----------------------------------------------------

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_faces(self):
        return len(self.faces)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def is_closed(self):
        return len(self.boundary_vertices) == 0

    @property
    def euler_characteristic(self):
        return self.n_vertices - self.n_edges + self.n_faces

    @property
    def n_components(self):
        self._compute_components()
        return self._n_components

    @property
    def genus(self):
        """Total genus of a closed mesh, summed over connected components."""
        return self.n_components - self.euler_characteristic // 2

    @property
    def bbox_diagonal(self):
        return float(np.linalg.norm(self.vertices.max(axis=0) - self.vertices.min(axis=0)))

    def _compute_components(self):
        if hasattr(self, "_n_components"):
            return
        from scipy.sparse import coo_matrix
        from scipy.sparse.csgraph import connected_components
        e = self.edges
        data = np.ones(len(e), dtype=np.int8)
        adj = coo_matrix((data, (e[:, 0], e[:, 1])), shape=(self.n_vertices,) * 2)
        self._n_components, self._component_labels = connected_components(adj, directed=False)

    def face_corner_positions(self):
        """Positions of the three corners of every face: three (F, 3) arrays."""
        v, f = self.vertices, self.faces
        return v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]

    def face_area_vectors(self):
        xi, xj, xk = self.face_corner_positions()
        return 0.5 * np.cross(xj - xi, xk - xi)

    def face_areas(self):
        return np.linalg.norm(self.face_area_vectors(), axis=1)

    def face_normals(self):
        n = self.face_area_vectors()
        return n / np.linalg.norm(n, axis=1, keepdims=True)

    def total_area(self):
        return float(self.face_areas().sum())

    def edge_lengths(self):
        e = self.edges
        return np.linalg.norm(self.vertices[e[:, 0]] - self.vertices[e[:, 1]], axis=1)

    @property
    def mean_edge_length(self):
        return float(self.edge_lengths().mean())

    def vertex_neighbors(self):
        """One-ring neighbor lists in CSR form: (offsets, neighbor indices)."""
        if not hasattr(self, "_nbr_csr"):
            order = np.argsort(self.half_edge_origin, kind="stable")
            counts = np.bincount(self.half_edge_origin, minlength=self.n_vertices)
            offsets = np.concatenate([[0], np.cumsum(counts)])
            self._nbr_csr = (offsets, self.half_edge_dest[order])
        return self._nbr_csr

    def with_vertices(self, vertices):
        """New mesh with the same connectivity and new positions.

        Skips the combinatorial validation; degenerate-face and finiteness
        checks still run.
        """
        new = object.__new__(TriMesh)
        v = np.ascontiguousarray(vertices, dtype=np.float64)
        if v.shape != self.vertices.shape:
            raise IndexOutOfRange("vertex array shape changed")
        if not np.isfinite(v).all():
            raise DegenerateFace("non-finite vertex coordinates")
        new.__dict__.update(self.__dict__)
        for cached in ("_nbr_csr",):
            new.__dict__.pop(cached, None)
        new.vertices = v
        new._validate_face_areas()
        new.vertices.setflags(write=False)
        return new

    def flipped(self):
        """Mesh with all face windings (and hence normals) reversed."""
        return TriMesh(self.vertices, self.faces[:, ::-1], allow_boundary=self.allow_boundary)

    def angle_defects(self):
        """2*pi minus the incident corner angles, per vertex (open meshes: pi on the rim)."""
        xi, xj, xk = self.face_corner_positions()

        def corner(u, w):
            return np.arctan2(np.linalg.norm(np.cross(u, w), axis=1), np.einsum("ij,ij->i", u, w))

        theta = np.stack([corner(xj - xi, xk - xi), corner(xk - xj, xi - xj), corner(xi - xk, xj - xk)], axis=1)
        defect = np.full(self.n_vertices, 2.0 * np.pi)
        defect[self.boundary_vertices] = np.pi
        for c in range(3):
            np.subtract.at(defect, self.faces[:, c], theta[:, c])
        return defect


def build_mesh(vertices, faces, allow_boundary=False):
    """Validate raw vertex/face arrays into a :class:`TriMesh`."""
    return TriMesh(vertices, faces, allow_boundary=allow_boundary)


def enclosed_volume(mesh):
    """Signed volume enclosed by a closed oriented mesh.

    Divergence-theorem sum (1/6) sum_f det(x_i, x_j, x_k); exact for
    polyhedra, negative if the orientation is inward.
    """
    xi, xj, xk = mesh.face_corner_positions()
    return float(np.einsum("ij,ij->", xi, np.cross(xj, xk)) / 6.0)


def diameter(mesh):
    """Exact max pairwise vertex distance (convex-hull prefilter)."""
    pts = mesh.vertices
    if len(pts) > 32:
        try:
            from scipy.spatial import ConvexHull

            pts = pts[np.unique(ConvexHull(pts).vertices)]
        except Exception:
            pass  # degenerate hull: fall back to all points
    best = 0.0
    block = 1024
    for i in range(0, len(pts), block):
        chunk = pts[i : i + block]
        d2 = np.sum((chunk[:, None, :] - pts[None, :, :]) ** 2, axis=2)
        best = max(best, float(d2.max()))
    return float(np.sqrt(best))
