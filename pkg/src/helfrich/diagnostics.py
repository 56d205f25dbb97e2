"""Numerical verification of the proved inequalities on arbitrary meshes.

Every check evaluates both sides of one inequality on a mesh and records
name, values, margin, and pass/fail. Reports are reproducible bit-for-bit
for a fixed mesh and seed. The lower-semicontinuity statement has no
pointwise discrete counterpart; its weak shadow is the refinement probe,
which only demonstrates convergence of the energy under mesh refinement.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curvature import _K_FLOOR_FACTOR, curvature_field
from .density import coercivity_constants
from .energy import canham_helfrich, willmore
from .errors import NotConvex
from .mesh import diameter as mesh_diameter

__all__ = [
    "CheckRecord",
    "VerificationReport",
    "verify_pointwise",
    "verify_first_variation",
    "verify_energy_bounds",
    "verify_diameter",
    "verify_li_yau",
    "refinement_probe",
    "RefinementProbe",
    "standard_report",
]


@dataclass
class CheckRecord:
    """One verified inequality: pass iff lhs <= rhs + tolerance."""

    name: str
    lhs: float
    rhs: float
    margin: float  # rhs + tolerance - lhs; nonnegative iff passed
    passed: bool
    statement: str

    def to_dict(self):
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "passed": bool(self.passed),
            "statement": self.statement,
        }


@dataclass
class VerificationReport:
    mesh_name: str
    n_vertices: int
    n_edges: int
    n_faces: int
    euler_characteristic: int
    genus: int
    components: int
    mean_edge_length: float
    records: list = field(default_factory=list)

    @property
    def all_pass(self):
        return all(r.passed for r in self.records)

    def to_dict(self):
        return {
            "mesh": {
                "name": self.mesh_name,
                "vertices": self.n_vertices,
                "edges": self.n_edges,
                "faces": self.n_faces,
                "euler_characteristic": self.euler_characteristic,
                "genus": self.genus,
                "components": self.components,
                "mean_edge_length": self.mean_edge_length,
            },
            "all_pass": bool(self.all_pass),
            "checks": [r.to_dict() for r in sorted(self.records, key=lambda r: r.name)],
        }

    @classmethod
    def for_mesh(cls, mesh, name="mesh"):
        return cls(
            name, mesh.n_vertices, mesh.n_edges, mesh.n_faces,
            mesh.euler_characteristic, mesh.genus, mesh.n_components,
            mesh.mean_edge_length,
        )


def _record(name, lhs, rhs, tol, statement):
    return CheckRecord(name, float(lhs), float(rhs), float(rhs + tol - lhs), bool(lhs <= rhs + tol), statement)


def verify_pointwise(curv):
    """Pointwise checks: |Hbar|^2 <= 2|A|^2 and the tensor identities."""
    H2 = curv.H**2
    A2 = curv.norm_A_squared()
    worst = int(np.argmax(H2 - 2.0 * A2))
    records = [
        _record(
            "pointwise/mean_curvature_vs_A", H2[worst], 2.0 * A2[worst], 1e-10,
            "|Hbar|^2 <= 2 |A|^2 at every vertex",
        )
    ]
    k_floor = (_K_FLOOR_FACTOR / curv.mesh.mean_edge_length) ** 2
    gauss_rhs = 0.5 * H2 - 0.5 * (curv.kappa1**2 + curv.kappa2**2)
    scale = np.abs(curv.K) + 0.5 * H2 + 0.5 * (curv.kappa1**2 + curv.kappa2**2)
    err = np.abs(curv.K - gauss_rhs) - (1e-10 * scale + 1.01 * k_floor)
    worst = int(np.argmax(err))
    records.append(
        _record(
            "pointwise/gauss_identity", abs(curv.K[worst] - gauss_rhs[worst]),
            1e-10 * scale[worst] + 1.01 * k_floor, 0.0,
            "K = |Hbar|^2 / 2 - |A|^2 / 4 at every vertex",
        )
    )
    if curv.has_tensors:
        A = curv.curvature_tensor
        II = curv.second_fundamental_form
        trace = np.einsum("vjij->vi", A)
        terr = np.abs(trace - curv.Hbar).max(axis=1)
        tscale = 1e-10 * (np.abs(curv.H) + 1.0 / curv.mesh.mean_edge_length)
        worst = int(np.argmax(terr - tscale))
        records.append(
            _record(
                "pointwise/trace_identity", terr[worst], tscale[worst], 0.0,
                "sum_j A_jij = Hbar_i at every vertex",
            )
        )
        frob_err = np.abs(np.einsum("vijk,vijk->v", A, A) - 2.0 * np.einsum("vijk,vijk->v", II, II))
        worst = int(np.argmax(frob_err - 1e-10 * (A2 + k_floor)))
        records.append(
            _record(
                "pointwise/frobenius_identity", frob_err[worst], 1e-10 * (A2[worst] + k_floor), 0.0,
                "|A|^2 = 2 |II|^2 at every vertex",
            )
        )
        sym_err = np.abs(A - (II.transpose(0, 1, 3, 2) + II)).max()
        records.append(
            _record(
                "pointwise/symmetrization", sym_err, 0.0, 1e-14 * max(1.0, A2.max()),
                "A_ijk = II^j_ik + II^k_ij componentwise",
            )
        )
    unit_err = np.abs(np.linalg.norm(curv.normal, axis=1) - 1.0).max()
    records.append(_record("pointwise/unit_normal", unit_err, 0.0, 1e-12, "|nu| = 1 at every vertex"))
    return records


def random_trig_fields(n_fields, length_scale, seed=0, n_waves=3):
    """Smooth vector fields built from random plane waves.

    Returns a list of callables ``X(points) -> (values (N,3), jacobians
    (N,3,3))``; scale to sup-norm 1 at the evaluation points is the
    caller's job.
    """
    rng = np.random.default_rng(seed)
    fields = []
    for _ in range(n_fields):
        wave = rng.normal(0.0, 1.5 / length_scale, size=(3, n_waves, 3))
        phase = rng.uniform(0.0, 2.0 * np.pi, size=(3, n_waves))
        amp = rng.normal(0.0, 1.0, size=(3, n_waves))

        def X(points, wave=wave, phase=phase, amp=amp):
            arg = np.einsum("itj,nj->nit", wave, points) + phase[None]
            vals = np.einsum("it,nit->ni", amp, np.cos(arg))
            jac = -np.einsum("it,nit,itj->nij", amp, np.sin(arg), wave)
            return vals, jac

        fields.append(X)
    return fields


def first_variation(mesh, curv, X):
    """delta V(X) = sum_v div^P X(x_v) a_v for a field with known Jacobian."""
    vals, jac = X(mesh.vertices)
    P = curv.projection()
    divp = np.einsum("vij,vij->v", P, jac)
    return float(divp @ curv.mixed_area), vals


def verify_first_variation(mesh, curv, n_fields=20, seed=0):
    """|delta V(X)| <= sqrt(2 mu) ||A||_L2 for random unit-sup-norm fields.

    A 5% tolerance on the right-hand side absorbs the vertex quadrature;
    the constant field and the identity field are included as anchors.
    """
    mu = float(curv.mixed_area.sum())
    normA_L2 = float(np.sqrt(curv.norm_A_squared() @ curv.mixed_area))
    rhs = np.sqrt(2.0 * mu) * normA_L2
    records = []

    def check(name, delta, statement):
        records.append(_record(name, abs(delta), rhs, 0.05 * rhs, statement))

    def constant_field(points):
        vals = np.zeros_like(points)
        vals[:, 0] = 1.0
        return vals, np.zeros((len(points), 3, 3))

    const, _ = first_variation(mesh, curv, constant_field)
    records.append(
        _record(
            "first_variation/constant_field", abs(const), 0.0, 1e-12 * mu,
            "delta V vanishes on constant fields (closed surface)",
        )
    )
    identity_delta = float(np.einsum("vii->v", curv.projection()) @ curv.mixed_area)
    check(
        "first_variation/identity_field", identity_delta,
        "delta V(x) = 2 mu <= sqrt(2 mu) ||A||_L2",
    )
    for i, X in enumerate(random_trig_fields(n_fields, length_scale=mesh.bbox_diagonal / 2, seed=seed)):
        vals, _ = X(mesh.vertices)
        sup = np.linalg.norm(vals, axis=1).max()

        def Xn(points, X=X, sup=sup):
            v, j = X(points)
            return v / sup, j / sup

        delta, _ = first_variation(mesh, curv, Xn)
        check(
            f"first_variation/random_{i:02d}", delta,
            "|delta V(X)| <= sqrt(2 mu) ||A||_L2 for |X| <= 1",
        )
    return records


def verify_energy_bounds(mesh, curv, params):
    """||A||^2 <= c1 (F + c2 mu) and its Willmore consequence.

    Raises NotConvex outside the strict convexity window.
    """
    if not params.strictly_convex:
        raise NotConvex("energy bounds need strictly convex parameters")
    c1, c2 = coercivity_constants(params, check_samples=0)
    mu = float(curv.mixed_area.sum())
    normA2 = float(curv.norm_A_squared() @ curv.mixed_area)
    F = canham_helfrich(mesh, curv, params, check_paths=False)
    rhs = c1 * (F + c2 * mu)
    w_var = willmore(mesh, curv, "varifold")
    tag = f"beta={params.beta:g},gamma={params.gamma:g},H0={params.h0:g}"
    return [
        _record(
            f"energy_bounds/curvature[{tag}]", normA2, rhs, 1e-9 * abs(rhs),
            "||A||_L2^2 <= c1 (F + c2 mu)",
        ),
        _record(
            f"energy_bounds/willmore[{tag}]", w_var, 2.0 * rhs, 1e-9 * abs(rhs),
            "W_varifold <= 2 c1 (F + c2 mu)",
        ),
    ]


def verify_diameter(mesh, curv):
    """Lower and upper diameter bounds through the Willmore energy."""
    mu = float(curv.mixed_area.sum())
    w_q = willmore(mesh, curv, "quarter")
    w_var = willmore(mesh, curv, "varifold")
    diam = mesh_diameter(mesh)
    return [
        _record(
            "diameter/lower_varifold", mu / np.sqrt(mu * w_var), diam, 1e-9 * diam,
            "mu / sqrt(mu W_varifold) <= diam (closed mesh)",
        ),
        _record(
            "diameter/lower_quarter", np.sqrt(mu / w_q), diam, 1e-9 * diam,
            "sqrt(mu / W_quarter) <= diam",
        ),
        _record(
            "diameter/upper", diam, (2.0 / np.pi) * np.sqrt(mu * w_q),
            1e-9 * diam, "diam <= (2/pi) sqrt(mu W_quarter)",
        ),
    ]


def verify_li_yau(mesh, curv, multiplicity_hint=1):
    """W_quarter >= 4 pi k for a mesh of known max point multiplicity k."""
    w_q = willmore(mesh, curv, "quarter")
    rhs = 4.0 * np.pi * multiplicity_hint
    return [
        _record(
            f"li_yau/k={multiplicity_hint}", rhs, w_q, 0.02 * rhs,
            "4 pi k <= W_quarter (max point multiplicity k)",
        )
    ]


@dataclass
class RefinementProbe:
    """Refinement table for one analytic shape; the weak convergence shadow."""

    rows: list  # (h, value, abs error)
    order: float
    monotone: bool

    @property
    def passed(self):
        return self.monotone and self.order >= 1.0

    def to_dict(self):
        return {
            "rows": [list(map(float, r)) for r in self.rows],
            "order": float(self.order),
            "monotone": bool(self.monotone),
            "passed": bool(self.passed),
        }


def refinement_probe(shape_generator, levels, exact, quantity):
    """Convergence of ``quantity(mesh, curv)`` toward a closed-form value.

    Parameters
    ----------
    shape_generator : callable level -> TriMesh
    levels : iterable of int
    exact : float
        Independent closed-form or high-resolution quadrature value.
    quantity : callable (mesh, curv) -> float

    Returns
    -------
    RefinementProbe
        ``passed`` iff errors decrease monotonically with an empirical
        order >= 1.
    """
    rows = []
    for level in levels:
        mesh = shape_generator(level)
        curv = curvature_field(mesh, tensors=False)
        val = float(quantity(mesh, curv))
        rows.append((mesh.mean_edge_length, val, abs(val - exact)))
    errs = np.array([r[2] for r in rows])
    hs = np.array([r[0] for r in rows])
    floor = 1e-12 * max(1.0, abs(exact))  # converged to rounding
    monotone = bool((np.diff(np.maximum(errs, floor)) <= 0).all())
    live = errs > floor
    if live.sum() >= 2:
        order = float(np.polyfit(np.log(hs[live]), np.log(errs[live]), 1)[0])
    else:
        order = float("inf")
    return RefinementProbe(rows, order, monotone)


def standard_report(mesh, name="mesh", params_list=None, n_fields=20, seed=0,
                    multiplicity_hint=1):
    """Full inequality suite on one mesh; returns a VerificationReport."""
    from .density import MaterialParams

    if params_list is None:
        params_list = [MaterialParams(1.0, -1.0, 0.0), MaterialParams(1.0, -0.5, 0.5)]
    curv = curvature_field(mesh)
    report = VerificationReport.for_mesh(mesh, name)
    report.records.extend(verify_pointwise(curv))
    report.records.extend(verify_first_variation(mesh, curv, n_fields=n_fields, seed=seed))
    for params in params_list:
        report.records.extend(verify_energy_bounds(mesh, curv, params))
    report.records.extend(verify_diameter(mesh, curv))
    report.records.extend(verify_li_yau(mesh, curv, multiplicity_hint))
    gauss_sum = float(curv.K @ curv.mixed_area)
    target = 2.0 * np.pi * mesh.euler_characteristic
    report.records.append(
        _record(
            "gauss_bonnet/total", abs(gauss_sum - target), 0.0, 1e-9,
            "sum K a = 2 pi chi exactly",
        )
    )
    return report
