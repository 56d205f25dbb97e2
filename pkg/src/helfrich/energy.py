"""Total bending energies: single-phase, Willmore, and sharp-interface multiphase.

Vertex curvature integrates against mixed areas. For multiphase energies a
vertex's mixed area is split between phases proportionally to the area of
its incident faces in each phase, and every interface edge charges its
length to *both* adjacent phases (each phase pays line tension on its own
boundary curve).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .density import f_ch
from .errors import PhaseCountMismatch, UnknownPhase

__all__ = [
    "PhaseField",
    "EnergyReport",
    "PhaseReport",
    "canham_helfrich",
    "willmore",
    "multiphase_energy",
    "boundary_mass",
    "interface_kink",
    "vertex_phase_weights",
]


class PhaseField:
    """Per-face integer phase labels in {1..N}.

    Parameters
    ----------
    labels : (F,) array_like of int
        One label per face, 1-based.
    n_phases : int, optional
        Number of phases; defaults to ``max(labels)``.
    """

    def __init__(self, labels, n_phases=None):
        labels = np.asarray(labels, dtype=np.int64)
        if labels.ndim != 1:
            raise PhaseCountMismatch("labels must be one integer per face")
        if labels.size and labels.min() < 1:
            raise PhaseCountMismatch("phase labels are 1-based")
        self.labels = labels
        self.n_phases = int(n_phases if n_phases is not None else labels.max(initial=1))
        if labels.max(initial=1) > self.n_phases:
            raise PhaseCountMismatch("label exceeds declared phase count")

    @classmethod
    def uniform(cls, mesh, phase=1):
        return cls(np.full(mesh.n_faces, phase, dtype=np.int64), n_phases=phase)

    def check(self, mesh):
        if len(self.labels) != mesh.n_faces:
            raise PhaseCountMismatch(
                f"{len(self.labels)} labels for {mesh.n_faces} faces"
            )

    def interface_edges(self, mesh):
        """Indices into ``mesh.edges`` where the two incident faces differ."""
        self.check(mesh)
        ef = mesh.edge_faces
        both = ef[:, 1] >= 0
        diff = np.zeros(len(ef), dtype=bool)
        diff[both] = self.labels[ef[both, 0]] != self.labels[ef[both, 1]]
        return np.flatnonzero(diff)

    def interface_vertex_degrees(self, mesh):
        """Interface-edge degree per vertex; even everywhere on closed meshes."""
        deg = np.zeros(mesh.n_vertices, dtype=np.int64)
        e = mesh.edges[self.interface_edges(mesh)]
        np.add.at(deg, e.ravel(), 1)
        return deg


def vertex_phase_weights(mesh, phases):
    """(V, N) fractions splitting each vertex's mixed area between phases.

    Proportional to incident face area per phase; rows sum to 1.
    """
    phases.check(mesh)
    areas = mesh.face_areas()
    w = np.zeros((mesh.n_vertices, phases.n_phases))
    for c in range(3):
        np.add.at(w, (mesh.faces[:, c], phases.labels - 1), areas)
    total = w.sum(axis=1, keepdims=True)
    return w / np.where(total == 0, 1.0, total)


def canham_helfrich(mesh, curv, params, check_paths=True, rtol=1e-9):
    """Single-phase bending energy sum_v [beta/2 (H - H0)^2 + gamma K] a.

    When the curvature field carries tensors the same value is also
    evaluated through the pointwise density ``f_ch(nu, A)`` and the two
    routes are required to agree to ``rtol`` (they are the same quantity
    written two ways).
    """
    a = curv.mixed_area
    scalar = float(
        np.sum((0.5 * params.beta * (curv.H - params.h0) ** 2 + params.gamma * curv.K) * a)
    )
    if check_paths and curv.has_tensors:
        tensor = float(np.sum(f_ch(curv.normal, curv.curvature_tensor, params) * a))
        denom = max(abs(scalar), abs(tensor), 1e-300)
        if abs(scalar - tensor) > rtol * denom:
            raise AssertionError(
                f"tensor and scalar energy paths disagree: {tensor!r} vs {scalar!r}"
            )
    return scalar


def willmore(mesh, curv, normalization="quarter"):
    """Willmore energy: 'quarter' = 1/4 sum H^2 a, 'varifold' = sum |Hbar|^2 a."""
    a = curv.mixed_area
    quarter = 0.25 * float(np.sum(curv.H**2 * a))
    varifold = float(np.einsum("vi,vi,v->", curv.Hbar, curv.Hbar, a))
    assert abs(varifold - 4.0 * quarter) <= 1e-12 * max(varifold, 1.0)
    if normalization == "quarter":
        return quarter
    if normalization == "varifold":
        return varifold
    raise ValueError(f"unknown normalization {normalization!r}")


@dataclass
class PhaseReport:
    phase_id: int
    area: float
    bending: float
    gauss: float
    spontaneous: float
    boundary_length: float

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class EnergyReport:
    """Decomposed multiphase energy; ``total`` equals the sum of its parts."""

    total: float
    line_tension: float
    willmore_quarter: float
    willmore_varifold: float
    phases: list = field(default_factory=list)

    def to_dict(self):
        return {
            "total": self.total,
            "line_tension": self.line_tension,
            "willmore_quarter": self.willmore_quarter,
            "willmore_varifold": self.willmore_varifold,
            "phases": [p.to_dict() for p in self.phases],
        }

    def parts_sum(self):
        return self.line_tension + sum(p.bending + p.gauss + p.spontaneous for p in self.phases)


def multiphase_energy(mesh, curv, phases, params_list):
    """Sharp-interface multiphase energy with per-phase line tension.

    Parameters
    ----------
    mesh : TriMesh
    curv : CurvatureField
    phases : PhaseField
        Labels must cover {1..N}; one entry of ``params_list`` per phase.
    params_list : sequence of MaterialParams
        ``params_list[i]`` applies to phase ``i + 1``; its ``sigma`` is the
        line tension that phase pays on its boundary curve.

    Returns
    -------
    EnergyReport
    """
    phases.check(mesh)
    if phases.n_phases != len(params_list):
        raise PhaseCountMismatch(
            f"{phases.n_phases} phases but {len(params_list)} parameter sets"
        )
    w = vertex_phase_weights(mesh, phases)
    a = curv.mixed_area
    H, K = curv.H, curv.K
    edge_len = mesh.edge_lengths()
    iface = phases.interface_edges(mesh)
    report = EnergyReport(0.0, 0.0, willmore(mesh, curv, "quarter"), willmore(mesh, curv, "varifold"))
    line = 0.0
    for p, params in enumerate(params_list, start=1):
        ap = a * w[:, p - 1]
        bending = float(np.sum(0.5 * params.beta * H**2 * ap))
        spont = float(np.sum((-params.beta * params.h0 * H + 0.5 * params.beta * params.h0**2) * ap))
        gauss = float(np.sum(params.gamma * K * ap))
        blen = _phase_boundary_length(mesh, phases, p, iface, edge_len)
        line += params.sigma * blen
        report.phases.append(
            PhaseReport(p, float(ap.sum()), bending, gauss, spont, blen)
        )
    report.line_tension = line
    report.total = report.parts_sum()
    return report


def _phase_boundary_length(mesh, phases, phase_id, iface=None, edge_len=None):
    if iface is None:
        iface = phases.interface_edges(mesh)
    if edge_len is None:
        edge_len = mesh.edge_lengths()
    ef = mesh.edge_faces[iface]
    touches = (phases.labels[ef[:, 0]] == phase_id) | (phases.labels[ef[:, 1]] == phase_id)
    return float(edge_len[iface[touches]].sum())


def boundary_mass(mesh, phases, phase_id):
    """Length of the boundary curve of one phase (0 for a whole closed mesh)."""
    phases.check(mesh)
    if not (phases.labels == phase_id).any():
        raise UnknownPhase(f"phase {phase_id} does not occur")
    return _phase_boundary_length(mesh, phases, phase_id)


def interface_kink(mesh, phases):
    """Max angle (radians) between face normals across interface edges.

    The discrete counterpart of the smooth no-kink condition at phase
    boundaries: refining a phase split of a smooth shape drives it to 0.
    """
    iface = phases.interface_edges(mesh)
    if len(iface) == 0:
        return 0.0
    n = mesh.face_normals()
    ef = mesh.edge_faces[iface]
    cosang = np.clip(np.einsum("ij,ij->i", n[ef[:, 0]], n[ef[:, 1]]), -1.0, 1.0)
    return float(np.arccos(cosang).max())
