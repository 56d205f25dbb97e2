from types import SimpleNamespace

import numpy as np
import pytest

from helfrich import shapes
from helfrich.curvature import _principal_directions, curvature_field
from helfrich.errors import DegenerateOneRing


def interior_mask(mesh):
    mask = np.ones(mesh.n_vertices, dtype=bool)
    mask[mesh.boundary_vertices] = False
    return mask


def test_sphere_curvatures_r1(icosphere4, icosphere4_curv):
    curv = icosphere4_curv
    assert np.abs(curv.H - 2.0).max() < 0.02 * 2.0
    assert np.abs(curv.K - 1.0).max() < 0.02


def test_sphere_curvatures_r2():
    m = shapes.icosphere(4, radius=2.0)
    curv = curvature_field(m, tensors=False)
    assert np.abs(curv.H - 1.0).max() < 0.02
    assert np.abs(curv.K - 0.25).max() < 0.02 * 0.25


def test_sphere_curvature_errors_shrink_under_refinement():
    h_errs, k_errs = [], []
    for level in (2, 3, 4):
        curv = curvature_field(shapes.icosphere(level), tensors=False)
        h_errs.append(np.abs(curv.H - 2.0).max())
        k_errs.append(np.abs(curv.K - 1.0).max())
    assert h_errs[0] > h_errs[1] > h_errs[2]
    assert k_errs[0] > k_errs[1] > k_errs[2]


def test_flat_patch_interior_exact_zero():
    patch = shapes.flat_patch(n=8, spacing=0.25)
    curv = curvature_field(patch)
    inside = interior_mask(patch)
    assert np.abs(curv.H[inside]).max() < 1e-12
    assert np.abs(curv.K[inside]).max() < 1e-12


def test_normals_unit_and_outward(icosphere4_curv, icosphere4):
    nu = icosphere4_curv.normal
    assert np.abs(np.linalg.norm(nu, axis=1) - 1.0).max() < 1e-12
    # outward on a star-shaped mesh
    assert (np.einsum("ij,ij->i", nu, icosphere4.vertices) > 0).all()


def test_mixed_area_partitions_surface(corpus):
    for name, (mesh, _) in corpus.items():
        curv = curvature_field(mesh, tensors=False)
        assert abs(curv.mixed_area.sum() - mesh.total_area()) < 1e-9 * mesh.total_area(), name


@pytest.mark.parametrize("name", ["icosphere3", "torus", "capsule", "perturbed_sphere", "split_sphere"])
def test_tensor_identities(corpus, name):
    mesh, _ = corpus[name]
    curv = curvature_field(mesh)
    A = curv.curvature_tensor
    II = curv.second_fundamental_form
    # A_ijk = II^j_ik + II^k_ij
    assert np.abs(A - (II.transpose(0, 1, 3, 2) + II)).max() == 0.0
    # |A|^2 = 2 |II|^2
    a2 = np.einsum("vijk,vijk->v", A, A)
    ii2 = np.einsum("vijk,vijk->v", II, II)
    assert np.abs(a2 - 2 * ii2).max() < 1e-10 * max(1.0, a2.max())
    # trace recovers the mean curvature vector
    trace = np.einsum("vjij->vi", A)
    assert np.abs(trace - curv.Hbar).max() < 1e-10 * max(1.0, np.abs(curv.H).max())
    # K = |Hbar|^2/2 - |A|^2/4
    gauss = 0.5 * np.einsum("vi,vi->v", curv.Hbar, curv.Hbar) - 0.25 * a2
    scale = np.abs(curv.K) + 0.25 * a2
    assert np.abs(curv.K - gauss).max() < 1e-10 * max(1.0, scale.max())
    assert np.abs(curv.norm_A_squared() - a2).max() < 1e-10 * max(1.0, a2.max())


def test_gauss_curvature_is_exact_angle_defect(corpus):
    for name, (mesh, _) in corpus.items():
        curv = curvature_field(mesh, tensors=False)
        total = curv.K @ curv.mixed_area
        assert abs(total - 2 * np.pi * mesh.euler_characteristic) < 1e-9, name


def test_principal_curvature_product_and_sum(icosphere4_curv):
    c = icosphere4_curv
    assert np.abs(c.kappa1 * c.kappa2 - c.K).max() < 1e-12 * np.abs(c.K).max()
    assert np.abs(c.kappa1 + c.kappa2 - c.H).max() < 1e-12 * np.abs(c.H).max()
    assert (c.kappa1 >= c.kappa2).all()


def test_principal_directions_orthonormal(icosphere4_curv):
    c = icosphere4_curv
    for d in (c.direction1, c.direction2):
        assert np.abs(np.linalg.norm(d, axis=1) - 1).max() < 1e-9
        assert np.abs(np.einsum("vi,vi->v", d, c.normal)).max() < 1e-9
    assert np.abs(np.einsum("vi,vi->v", c.direction1, c.direction2)).max() < 1e-9


def test_degenerate_one_ring_raises():
    # two neighbors whose tangential displacements are collinear: the
    # normal-variation fit cannot determine curvature across that line
    stub = SimpleNamespace(
        vertices=np.array([[0.0, 0, 0], [1.0, 0, 0], [2.0, 0, 0]]),
        n_vertices=3,
        vertex_neighbors=lambda: (np.array([0, 2, 3, 4]), np.array([1, 2, 0, 0])),
    )
    nu = np.tile(np.array([0.0, 0, 1.0]), (3, 1))
    with pytest.raises(DegenerateOneRing) as err:
        _principal_directions(stub, nu, np.array([True, False, False]))
    assert err.value.vertex == 0


def test_clamp_reconciles_discriminant(icosphere4_curv):
    c = icosphere4_curv
    # defect-K on a discrete sphere exceeds (H/2)^2, so H snaps to 2 sqrt(K)
    assert c.clamped.all()
    assert np.abs(c.H - 2 * np.sqrt(c.K)).max() < 1e-12 * 2


def test_open_mesh_boundary_is_nan():
    patch = shapes.flat_patch(n=6, spacing=0.3)
    curv = curvature_field(patch)
    boundary = patch.boundary_vertices
    assert np.isnan(curv.H[boundary]).all()
    assert np.isfinite(curv.H[interior_mask(patch)]).all()
