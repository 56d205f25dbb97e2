"""Constraint functionals: areas, volume, isoperimetric gate, phase overlap.

Phase measures are sampled at vertices with mixed-area weights. The
overlap between two phases is the weighted count of cross pairs closer
than epsilon,

    m(eps) = sum_{x in A} w_A(x) * sum_{y in B, |x-y| < eps} w_B(y),

accelerated by a uniform spatial hash of cell size epsilon. The admissible
scaling is m(eps) <= eps^3 / eps0 on (0, eps0): surface-to-surface contact
scales like eps^2 and fails, curve or point contact scales like eps^3 and
passes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientSamples, NonPositiveTarget, PhaseCountMismatch
from .mesh import enclosed_volume

__all__ = [
    "ConstraintSet",
    "PhaseSupport",
    "phase_support",
    "isoperimetric_check",
    "overlap_measure",
    "no_overlap_check",
    "OverlapVerdict",
    "constraint_residuals",
    "ConstraintResiduals",
]


@dataclass(frozen=True)
class ConstraintSet:
    """Targets for the constrained minimization.

    area : target total area m (> 0)
    volume : target enclosed volume e (> 0)
    phase_areas : per-phase area targets, summing to ``area`` (optional)
    overlap_eps0 : threshold of the no-overlap condition (length units)
    tol : relative constraint tolerance
    """

    area: float
    volume: float
    phase_areas: tuple = None
    overlap_eps0: float = 0.0
    tol: float = 1e-6

    def __post_init__(self):
        if not (self.area > 0 and self.volume > 0):
            raise NonPositiveTarget(f"need m, e > 0, got ({self.area}, {self.volume})")
        if self.phase_areas is not None:
            pa = tuple(float(x) for x in self.phase_areas)
            object.__setattr__(self, "phase_areas", pa)
            if any(x <= 0 for x in pa):
                raise NonPositiveTarget("phase areas must be > 0")
            if abs(sum(pa) - self.area) > 1e-9 * self.area:
                raise PhaseCountMismatch(
                    f"phase areas sum to {sum(pa)}, target total is {self.area}"
                )

    @property
    def isoperimetric_verdict(self):
        return isoperimetric_check(self.area, self.volume)


def isoperimetric_check(m, e, rtol=1e-9):
    """Admissibility of (area, volume): '(6 sqrt(pi) e)^(1/3) <= sqrt(m)'.

    Returns 'feasible', 'equality' (the round sphere, to ``rtol``), or
    'infeasible'.
    """
    if not (m > 0 and e > 0):
        raise NonPositiveTarget(f"need m, e > 0, got ({m}, {e})")
    lhs = (6.0 * np.sqrt(np.pi) * e) ** (1.0 / 3.0)
    rhs = np.sqrt(m)
    if abs(lhs - rhs) <= rtol * rhs:
        return "equality"
    return "feasible" if lhs < rhs else "infeasible"


@dataclass(frozen=True)
class PhaseSupport:
    """Weighted point sampling of a phase measure.

    points : (N, 3) positions
    weights : (N,) nonnegative mass weights (mixed areas)
    resolution : mesh length scale below which the sampling is atomic
    """

    points: np.ndarray
    weights: np.ndarray
    resolution: float

    def __post_init__(self):
        object.__setattr__(self, "points", np.ascontiguousarray(self.points, dtype=np.float64))
        object.__setattr__(self, "weights", np.ascontiguousarray(self.weights, dtype=np.float64))
        if len(self.points) != len(self.weights):
            raise ValueError("points and weights length mismatch")

    @property
    def mass(self):
        return float(self.weights.sum())


def phase_support(mesh, phases, phase_id, mixed_area=None):
    """Vertex sampling of one phase's area measure.

    Vertices receive their mixed area times the fraction of incident face
    area in the phase; zero-weight vertices are dropped.
    """
    from .curvature import mixed_voronoi_areas
    from .energy import vertex_phase_weights

    if mixed_area is None:
        mixed_area, _, _ = mixed_voronoi_areas(mesh)
    w = vertex_phase_weights(mesh, phases)[:, phase_id - 1] * mixed_area
    keep = w > 0
    return PhaseSupport(mesh.vertices[keep], w[keep], mesh.mean_edge_length)


def _cell_keys(points, eps, origin):
    cells = np.floor((points - origin) / eps).astype(np.int64)
    if cells.max(initial=0) >= (1 << 20):
        raise ValueError("radius too small for the grid extent")
    # nonnegative by construction of origin; pack three ints into one key
    return ((cells[:, 0] << 42) | (cells[:, 1] << 21) | cells[:, 2], cells)


def _per_point_overlap_brute(pa, wa, pb, wb, eps):
    s = np.zeros(len(pa))
    eps2 = eps * eps
    for i in range(len(pa)):
        d2 = np.sum((pb - pa[i]) ** 2, axis=1)
        sel = wb[d2 < eps2]
        if len(sel):
            # reduceat, not sum: the grid kernel accumulates segments with
            # reduceat and bitwise equality between the two is part of the
            # contract
            s[i] = np.add.reduceat(sel, [0])[0]
    return s


def _per_point_overlap_grid(pa, wa, pb, wb, eps):
    origin = np.minimum(pa.min(axis=0), pb.min(axis=0)) - eps
    keys_b, _ = _cell_keys(pb, eps, origin)
    order_b = np.argsort(keys_b, kind="stable")
    keys_b_sorted = keys_b[order_b]
    _, cells_a = _cell_keys(pa, eps, origin)
    pairs_a = []
    pairs_b = []
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            for dz in (-1, 0, 1):
                shifted = cells_a + np.array([dx, dy, dz], dtype=np.int64)
                key = (shifted[:, 0] << 42) | (shifted[:, 1] << 21) | shifted[:, 2]
                lo = np.searchsorted(keys_b_sorted, key, side="left")
                hi = np.searchsorted(keys_b_sorted, key, side="right")
                count = hi - lo
                has = count > 0
                if not has.any():
                    continue
                sizes = count[has]
                ai = np.repeat(np.flatnonzero(has), sizes)
                ramp = np.arange(sizes.sum()) - np.repeat(np.cumsum(sizes) - sizes, sizes)
                bi = order_b[np.repeat(lo[has], sizes) + ramp]
                pairs_a.append(ai)
                pairs_b.append(bi)
    s = np.zeros(len(pa))
    if not pairs_a:
        return s
    ai = np.concatenate(pairs_a)
    bi = np.concatenate(pairs_b)
    d2 = np.sum((pa[ai] - pb[bi]) ** 2, axis=1)
    hit = d2 < eps * eps
    ai, bi = ai[hit], bi[hit]
    if len(ai) == 0:
        return s
    # ascending (a, b) order makes the segment sums bitwise equal to the
    # brute-force masked sums
    order = np.lexsort((bi, ai))
    ai, bi = ai[order], bi[order]
    uniq_a, seg_start = np.unique(ai, return_index=True)
    s[uniq_a] = np.add.reduceat(wb[bi], seg_start)
    return s


def overlap_measure(support_a, support_b, eps, method="grid"):
    """Product-measure mass of the eps-neighborhood of the diagonal.

    ``method='brute'`` runs the O(N*M) double loop; the default spatial
    grid gives identical results (same summation order) in
    O(N + M + matches).
    """
    if eps <= 0:
        raise ValueError("eps must be > 0")
    pa, wa = support_a.points, support_a.weights
    pb, wb = support_b.points, support_b.weights
    if len(pa) == 0 or len(pb) == 0:
        return 0.0
    kernel = _per_point_overlap_grid if method == "grid" else _per_point_overlap_brute
    s = kernel(pa, wa, pb, wb, eps)
    return float(np.sum(wa * s))


@dataclass(frozen=True)
class OverlapVerdict:
    """Outcome of the no-overlap scaling gate."""

    passed: bool
    slope: float  # NaN when fewer than two nonzero samples
    radii: np.ndarray
    measures: np.ndarray
    bounds: np.ndarray
    eps0: float

    def to_dict(self):
        return {
            "passed": bool(self.passed),
            "slope": float(self.slope),
            "eps0": float(self.eps0),
            "radii": [float(x) for x in self.radii],
            "measures": [float(x) for x in self.measures],
            "bounds": [float(x) for x in self.bounds],
        }


def no_overlap_check(support_a, support_b, eps0, n_eps=6, eps_min=None):
    """Gate m(eps) <= eps^3 / eps0 on sampled radii, plus a slope fit.

    Radii are log-spaced in (eps_min, eps0); the floor defaults to the
    supports' sampling resolution, below which the discrete measure is
    atomic and the scaling law is meaningless.

    Returns an :class:`OverlapVerdict`; the fitted exponent is the
    least-squares slope of log(measure) against log(eps) over nonzero
    samples (NaN if fewer than two).
    """
    if n_eps < 4:
        raise InsufficientSamples(f"need at least 4 radii, got {n_eps}")
    if eps_min is None:
        eps_min = 1.5 * max(support_a.resolution, support_b.resolution)
    if not 0 < eps_min < eps0:
        raise InsufficientSamples(
            f"empty radius range ({eps_min:g}, {eps0:g}); refine the supports or raise eps0"
        )
    radii = np.geomspace(eps_min, 0.999 * eps0, n_eps)
    measures = np.array([overlap_measure(support_a, support_b, e) for e in radii])
    bounds = radii**3 / eps0
    passed = bool((measures <= bounds).all())
    nz = measures > 0
    if nz.sum() >= 2:
        slope = float(np.polyfit(np.log(radii[nz]), np.log(measures[nz]), 1)[0])
    else:
        slope = float("nan")
    return OverlapVerdict(passed, slope, radii, measures, bounds, float(eps0))


@dataclass(frozen=True)
class ConstraintResiduals:
    """Relative residuals against a :class:`ConstraintSet`."""

    area: float
    volume: float
    phase_areas: tuple
    boundary_mass: float  # total open-boundary length; 0 on closed meshes

    @property
    def max_abs(self):
        vals = [abs(self.area), abs(self.volume), abs(self.boundary_mass)]
        vals.extend(abs(x) for x in self.phase_areas)
        return max(vals)

    def to_dict(self):
        return {
            "area": self.area,
            "volume": self.volume,
            "phase_areas": list(self.phase_areas),
            "boundary_mass": self.boundary_mass,
        }


def constraint_residuals(mesh, phases, cs):
    """Relative area/volume residuals and the phase-sum boundary mass."""
    from .energy import vertex_phase_weights

    area = mesh.total_area()
    vol = enclosed_volume(mesh)
    res_phase = ()
    if cs.phase_areas is not None:
        phases.check(mesh)
        if len(cs.phase_areas) != phases.n_phases:
            raise PhaseCountMismatch(
                f"{len(cs.phase_areas)} phase targets for {phases.n_phases} phases"
            )
        face_area = mesh.face_areas()
        per_phase = np.bincount(
            phases.labels - 1, weights=face_area, minlength=phases.n_phases
        )
        res_phase = tuple(
            (float(per_phase[i]) - cs.phase_areas[i]) / cs.phase_areas[i]
            for i in range(phases.n_phases)
        )
    boundary_he = mesh.half_edge_twin < 0
    blen = float(
        np.linalg.norm(
            mesh.vertices[mesh.half_edge_origin[boundary_he]]
            - mesh.vertices[mesh.half_edge_dest[boundary_he]],
            axis=1,
        ).sum()
    )
    return ConstraintResiduals(
        area=(area - cs.area) / cs.area,
        volume=(vol - cs.volume) / cs.volume,
        phase_areas=res_phase,
        boundary_mass=blen,
    )
