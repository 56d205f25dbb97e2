"""Per-vertex curvature fields on triangle meshes.

The construction keeps the classical discrete estimators as primaries and
derives everything else from them so that the pointwise tensor identities
hold to rounding, not just to discretization error:

* mixed Voronoi area ``a`` (Meyer style, obtuse fallback),
* Gauss curvature ``K`` = angle defect / mixed area, so the global sum is
  exactly 2*pi*chi,
* scalar mean curvature ``H`` = cotangent mean-curvature vector projected
  on the area-weighted vertex normal,
* principal curvatures as the roots of ``t^2 - H t + K``; where the
  discriminant is negative (defect noise near umbilics makes K exceed
  H^2/4) H snaps to the nearest consistent value ``sign(H) * 2 sqrt(K)``,
* the mean curvature vector is stored as ``H * normal`` and the curvature
  tensors are assembled from the principal decomposition, so the trace,
  norm, and Gauss identities are exact by construction.

Principal directions come from a least-squares fit of normal variation
over the one-ring; only the directions are used, the magnitudes come from
(H, K).

All per-vertex accumulations scatter face contributions with ``np.add.at``
in face-index order, so repeated runs are bitwise deterministic.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateOneRing

__all__ = ["CurvatureField", "curvature_field"]

# Below (_K_FLOOR_FACTOR / mean edge)^2 the defect is rounding noise and no
# umbilic reconciliation is attempted.
_K_FLOOR_FACTOR = 1e-7


class CurvatureField:
    """Vertex curvature data for a mesh; see :func:`curvature_field`.

    Attributes
    ----------
    mixed_area : (V,) ndarray
        Mixed Voronoi area weights; they partition the total mesh area.
    normal : (V, 3) ndarray
        Unit outward vertex normals (area-weighted).
    Hbar : (V, 3) ndarray
        Mean curvature vector, equal to ``H * normal``.
    H, K : (V,) ndarray
        Scalar mean and Gauss curvature. ``sum(K * mixed_area)`` is the
        total angle defect, exactly.
    kappa1, kappa2 : (V,) ndarray
        Principal curvatures, ``kappa1 >= kappa2``.
    direction1, direction2 : (V, 3) ndarray
        Principal directions (unit, tangent, orthogonal).
    shape_operator : (V, 3, 3) ndarray or None
        ``kappa1 d1 d1^T + kappa2 d2 d2^T``; None in scalars-only fields.
    clamped : (V,) bool ndarray
        Vertices where H was reconciled with K (negative discriminant).

    Boundary vertices of open test meshes carry NaN in all curvature
    fields; only ``mixed_area`` and ``normal`` are populated there.
    """

    def __init__(self, mesh, mixed_area, normal, H, K, kappa1, kappa2, clamped,
                 direction1=None, direction2=None, shape_operator=None):
        self.mesh = mesh
        self.mixed_area = mixed_area
        self.normal = normal
        self.H = H
        self.K = K
        self.Hbar = H[:, None] * normal
        self.kappa1 = kappa1
        self.kappa2 = kappa2
        self.clamped = clamped
        self.direction1 = direction1
        self.direction2 = direction2
        self.shape_operator = shape_operator
        self._II = None
        self._A = None

    @property
    def has_tensors(self):
        return self.shape_operator is not None

    def projection(self):
        """Tangential projections P = I - normal normal^T, shape (V, 3, 3)."""
        nu = self.normal
        return np.eye(3)[None] - nu[:, :, None] * nu[:, None, :]

    @property
    def second_fundamental_form(self):
        """II[v, i, j, k] = S[v, i, j] * normal[v, k]."""
        if self._II is None:
            if not self.has_tensors:
                raise ValueError("field was built with tensors=False")
            self._II = np.einsum("vij,vk->vijk", self.shape_operator, self.normal)
        return self._II

    @property
    def curvature_tensor(self):
        """A[v, i, j, k] = II[v, i, k, j] + II[v, i, j, k]; trace_j A[j,i,j] = Hbar_i."""
        if self._A is None:
            II = self.second_fundamental_form
            self._A = II.transpose(0, 1, 3, 2) + II
        return self._A

    def norm_A_squared(self):
        """Pointwise |A|^2 = 2 (kappa1^2 + kappa2^2), shape (V,)."""
        return 2.0 * (self.kappa1**2 + self.kappa2**2)


def _face_angles_and_cots(mesh):
    xi, xj, xk = mesh.face_corner_positions()

    def corner(u, w):
        cross = np.linalg.norm(np.cross(u, w), axis=1)
        dot = np.einsum("ij,ij->i", u, w)
        return np.arctan2(cross, dot), dot / np.where(cross == 0, 1.0, cross)

    th_i, cot_i = corner(xj - xi, xk - xi)
    th_j, cot_j = corner(xk - xj, xi - xj)
    th_k, cot_k = corner(xi - xk, xj - xk)
    return np.stack([th_i, th_j, th_k], axis=1), np.stack([cot_i, cot_j, cot_k], axis=1)


def mixed_voronoi_areas(mesh, theta=None, cot=None):
    """Per-vertex mixed areas and the per-face-corner split they sum from.

    Returns ``(a, corner_areas, obtuse_corner)`` with ``corner_areas`` of
    shape (F, 3). Non-obtuse faces get the Voronoi split; a face obtuse at
    corner c contributes area/2 to c and area/4 to the others.
    """
    if theta is None or cot is None:
        theta, cot = _face_angles_and_cots(mesh)
    xi, xj, xk = mesh.face_corner_positions()
    areas = mesh.face_areas()
    lij2 = np.sum((xj - xi) ** 2, axis=1)
    ljk2 = np.sum((xk - xj) ** 2, axis=1)
    lki2 = np.sum((xi - xk) ** 2, axis=1)
    corner_areas = np.empty_like(theta)
    corner_areas[:, 0] = (lij2 * cot[:, 2] + lki2 * cot[:, 1]) / 8.0
    corner_areas[:, 1] = (lij2 * cot[:, 2] + ljk2 * cot[:, 0]) / 8.0
    corner_areas[:, 2] = (lki2 * cot[:, 1] + ljk2 * cot[:, 0]) / 8.0
    obtuse_corner = theta > np.pi / 2.0
    any_obtuse = obtuse_corner.any(axis=1)
    if any_obtuse.any():
        fallback = np.where(obtuse_corner[any_obtuse], 0.5, 0.25) * areas[any_obtuse, None]
        corner_areas[any_obtuse] = fallback
    a = np.zeros(mesh.n_vertices)
    for c in range(3):
        np.add.at(a, mesh.faces[:, c], corner_areas[:, c])
    return a, corner_areas, obtuse_corner


def vertex_normals(mesh):
    """Area-weighted unit vertex normals and the raw area-vector sums."""
    N = np.zeros((mesh.n_vertices, 3))
    area_vec = mesh.face_area_vectors()
    for c in range(3):
        np.add.at(N, mesh.faces[:, c], area_vec)
    norms = np.linalg.norm(N, axis=1, keepdims=True)
    return N / np.where(norms == 0, 1.0, norms), N


def cotan_vector(mesh, cot=None):
    """Unnormalized cotangent sum L_v = sum_j (cot a_ij + cot b_ij)(x_v - x_j)."""
    if cot is None:
        _, cot = _face_angles_and_cots(mesh)
    v, f = mesh.vertices, mesh.faces
    L = np.zeros((mesh.n_vertices, 3))
    for host, other, far in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        w = cot[:, far, None] * (v[f[:, host]] - v[f[:, other]])
        np.add.at(L, f[:, host], w)
        np.add.at(L, f[:, other], -w)
    return L


def scalar_curvatures(mesh):
    """Light curvature pass: (a, normal, H, K, kappa1, kappa2, clamped, raw H).

    This is the data the energy needs; no one-ring fit and no tensors.
    """
    theta, cot = _face_angles_and_cots(mesh)
    a, _, _ = mixed_voronoi_areas(mesh, theta, cot)
    nu, _ = vertex_normals(mesh)
    L = cotan_vector(mesh, cot)
    Hbar_raw = L / (2.0 * a[:, None])
    H_raw = np.einsum("ij,ij->i", Hbar_raw, nu)
    defect = mesh.angle_defects()
    K = defect / a
    k_floor = (_K_FLOOR_FACTOR / mesh.mean_edge_length) ** 2
    sign = np.where(H_raw < 0, -1.0, 1.0)
    clamped = (K > k_floor) & (H_raw**2 < 4.0 * K)
    H = np.where(clamped, sign * 2.0 * np.sqrt(np.maximum(K, 0.0)), H_raw)
    disc = np.sqrt(np.maximum(H**2 - 4.0 * K, 0.0))
    kappa1 = (H + disc) / 2.0
    kappa2 = (H - disc) / 2.0
    return a, nu, H, K, kappa1, kappa2, clamped, H_raw


def _tangent_bases(nu):
    smallest = np.argmin(np.abs(nu), axis=1)
    helper = np.zeros_like(nu)
    helper[np.arange(len(nu)), smallest] = 1.0
    t1 = np.cross(nu, helper)
    t1 /= np.linalg.norm(t1, axis=1, keepdims=True)
    t2 = np.cross(nu, t1)
    return t1, t2


def _principal_directions(mesh, nu, interior):
    """One-ring least-squares fit of normal variation; returns unit d1, d2.

    Only the fitted directions are used downstream; the curvature
    magnitudes come from (H, K).
    """
    t1, t2 = _tangent_bases(nu)
    offsets, nbrs = mesh.vertex_neighbors()
    counts = np.diff(offsets)
    src = np.repeat(np.arange(mesh.n_vertices), counts)
    du = mesh.vertices[nbrs] - mesh.vertices[src]
    dn = nu[nbrs] - nu[src]
    u1 = np.einsum("ej,ej->e", du, t1[src])
    u2 = np.einsum("ej,ej->e", du, t2[src])
    w1 = np.einsum("ej,ej->e", dn, t1[src])
    w2 = np.einsum("ej,ej->e", dn, t2[src])
    # unknowns (s11, s12, s22): rows [u1,u2,0]->w1 and [0,u1,u2]->w2
    M = np.zeros((mesh.n_vertices, 3, 3))
    b = np.zeros((mesh.n_vertices, 3))
    r1 = np.stack([u1, u2, np.zeros_like(u1)], axis=1)
    r2 = np.stack([np.zeros_like(u1), u1, u2], axis=1)
    np.add.at(M, src, np.einsum("ei,ej->eij", r1, r1) + np.einsum("ei,ej->eij", r2, r2))
    np.add.at(b, src, r1 * w1[:, None] + r2 * w2[:, None])
    diag = M[:, (0, 1, 2), (0, 1, 2)].sum(axis=1) / 3.0
    det = np.linalg.det(M)
    bad = interior & (np.abs(det) <= 1e-12 * np.maximum(diag, 1e-300) ** 3)
    if bad.any():
        raise DegenerateOneRing(int(np.flatnonzero(bad)[0]))
    M[~interior] = np.eye(3)
    s = np.linalg.solve(M, b[:, :, None])[:, :, 0]
    if not np.isfinite(s[interior]).all():
        raise DegenerateOneRing(int(np.flatnonzero(interior & ~np.isfinite(s).all(axis=1))[0]))
    s11, s12, s22 = s[:, 0], s[:, 1], s[:, 2]
    # closed-form 2x2 symmetric eigenvectors; (cos, sin) belongs to the
    # larger eigenvalue
    angle = 0.5 * np.arctan2(2.0 * s12, s11 - s22)
    c, sn = np.cos(angle)[:, None], np.sin(angle)[:, None]
    d1 = c * t1 + sn * t2
    d2 = -sn * t1 + c * t2
    return d1, d2


def curvature_field(mesh, tensors=True):
    """Compute all per-vertex curvature quantities of a mesh.

    Parameters
    ----------
    mesh : TriMesh
    tensors : bool
        Also fit principal directions and assemble the shape operator
        (needed for II, A, and the tensor energy path). The scalars-only
        variant is what the optimizer iterates on.

    Raises
    ------
    DegenerateOneRing
        If the one-ring fit is singular or produces non-finite values at
        an interior vertex (the vertex index is attached).
    """
    a, nu, H, K, kappa1, kappa2, clamped, _ = scalar_curvatures(mesh)
    interior = np.ones(mesh.n_vertices, dtype=bool)
    interior[mesh.boundary_vertices] = False
    if not np.isfinite(H[interior]).all() or not np.isfinite(K[interior]).all():
        bad = np.flatnonzero(interior & ~(np.isfinite(H) & np.isfinite(K)))
        raise DegenerateOneRing(int(bad[0]))
    for arr in (H, K, kappa1, kappa2):
        arr[~interior] = np.nan
    d1 = d2 = S = None
    if tensors:
        d1, d2 = _principal_directions(mesh, nu, interior)
        S = kappa1[:, None, None] * np.einsum("vi,vj->vij", d1, d1) + kappa2[
            :, None, None
        ] * np.einsum("vi,vj->vij", d2, d2)
    return CurvatureField(
        mesh, a, nu, H, K, kappa1, kappa2, clamped,
        direction1=d1, direction2=d2, shape_operator=S,
    )
