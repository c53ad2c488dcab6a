"""Scattering in a half-space whose wall is locally indented (a cavity).

The fluid is split by a virtual curve Gamma2 whose ends sit on the wall line.
Outside it (region 1) the field is the hybrid half-space representation over
the full line Gamma0 plus single and double layers on Gamma2; inside it
(region 2) a single layer on the physical boundary Gamma1 plus the same
Gamma2 layers::

    u1 = u_in1 + S0[W sigma0] + F[xi] + S2[sigma2] + D2[mu] + (S + beta D)_s1
    u2 = u_in2 + S1[sigma1]            + S2[sigma2] + D2[mu] + (S + beta D)_s2

Mesh conventions: Gamma0 and Gamma1 normals point into the fluid, Gamma2
normals point from region 2 into region 1, scatterers have outward normals.
"""

from dataclasses import dataclass, field
from enum import Enum
from time import perf_counter
from typing import Optional, Sequence

import numpy as np

from .geometry import (
    Mesh,
    Role,
    WaveParams,
    concatenate,
    distance_to_mesh,
    graded_breakpoints,
    polyline,
    point_in_curves,
)
from .halfspace import WALL_NORMAL, solve_hybrid
from .potentials import eval_layer, kernel_dGdnx, kernel_G, layer_matrix
from .sommerfeld import (
    SommerfeldRule,
    TruncationParams,
    eval_F,
    field_matrix_F,
    field_matrix_H,
    fourier_of_source,
    layer_trace_matrix,
    rule_for_extent,
    window,
    windowed_transform_matrix,
)

__all__ = [
    "Region",
    "CavityProblem",
    "CavityDensities",
    "classify_point",
    "solve_cavity",
    "solve_cavity_with_scatterers",
    "eval_total_field_cavity",
    "cavity_residuals",
    "intensity_sum",
    "half_disc_cavity",
    "flat_cavity",
    "resonator_cavity",
    "Grading",
]

BOUNDARY_TOL = 1e-9


class Region(Enum):
    OMEGA1 = "omega1"
    OMEGA2 = "omega2"
    OUTSIDE = "outside"
    BOUNDARY = "boundary"


def _closed_mesh(meshes):
    return concatenate(meshes, Role.SCATTERER, closed=True)


@dataclass
class CavityProblem:
    """Cavity geometry, sources and numerical parameters.

    Parameters
    ----------
    wave : WaveParams
    wall : Mesh
        Full line segment (-M0, M0) on y = 0 with a vertex at each end of Gamma2.
    cavity : Mesh
        Physical boundary inside Gamma2 (flat parts and the indentation).
    virtual : Mesh
        Open curve from one wall point to another, normals toward region 1.
    source1, source2 : array or None
        Point sources in region 1 and region 2.
    scatterers1, scatterers2 : sequence of Mesh
        Rigid closed obstacles inside region 1 and region 2.
    window_virtual : bool
        Whether the wall density enters the Gamma2 rows windowed (W sigma0,
        consistent with the field representation) or unwindowed.
    """

    wave: WaveParams
    wall: Mesh
    cavity: Mesh
    virtual: Mesh
    source1: Optional[np.ndarray] = None
    source2: Optional[np.ndarray] = None
    scatterers1: Sequence[Mesh] = ()
    scatterers2: Sequence[Mesh] = ()
    trunc: TruncationParams = field(default_factory=TruncationParams)
    beta: Optional[complex] = None
    quad_order: int = 10
    rule: Optional[SommerfeldRule] = None
    extent: float = 0.0
    points_per_period: float = 40.0
    window_virtual: bool = True

    def __post_init__(self):
        self.scatterers1 = tuple(self.scatterers1)
        self.scatterers2 = tuple(self.scatterers2)
        if self.beta is None:
            self.beta = -1j / self.wave.k
        if len(self.virtual) == 0 or len(self.cavity) == 0:
            raise ValueError("cavity and virtual meshes must be non-empty")
        ends = np.array([self.virtual.p0[0], self.virtual.p1[-1]])
        if np.max(np.abs(ends[:, 1])) > 1e-12:
            raise ValueError("virtual boundary must start and end on the wall line")
        wall_nodes = np.concatenate([self.wall.p0[:, 0], self.wall.p1[-1:, 0]])
        for e in ends[:, 0]:
            if np.min(np.abs(wall_nodes - e)) > 1e-9 * max(1.0, abs(e)):
                raise ValueError("the wall mesh needs a vertex at each end of the virtual boundary")
        if np.any(np.abs(np.concatenate([self.wall.p0[:, 1], self.wall.p1[:, 1]])) > 0):
            raise ValueError("wall mesh must lie on y = 0")
        if np.min(self.virtual.midpoints[:, 1]) <= 0:
            raise ValueError("virtual boundary must lie in y > 0 between its end points")
        self._check_orientation()
        for m in self.scatterers1 + self.scatterers2:
            if not m.closed:
                raise ValueError("scatterer meshes must be closed")
        if self.rule is None:
            self.rule = rule_for_extent(self.trunc, self.extent, self.points_per_period)
        if self.source1 is not None:
            self.source1 = np.asarray(self.source1, dtype=float)
            if classify_point(self, self.source1) != Region.OMEGA1:
                raise ValueError("source1 must lie inside region 1")
        if self.source2 is not None:
            self.source2 = np.asarray(self.source2, dtype=float)
            if classify_point(self, self.source2) != Region.OMEGA2:
                raise ValueError("source2 must lie inside region 2")
        for m in self.scatterers1:
            if np.any(self._in_region2(m.p0)) or np.min(m.p0[:, 1]) <= 0:
                raise ValueError("scatterers1 must lie inside region 1")
        for m in self.scatterers2:
            if not np.all(self._in_region2(m.p0)):
                raise ValueError("scatterers2 must lie inside region 2")

    def _check_orientation(self):
        # Gamma2 normals must point out of the region enclosed by Gamma1 + Gamma2,
        # Gamma1 normals into it.
        h = 1e-6 * min(self.virtual.lengths.min(), self.cavity.lengths.min())
        loop = [self.cavity, self.virtual]
        probe2 = self.virtual.midpoints + h * self.virtual.normals
        if np.any(point_in_curves(probe2, loop)):
            raise ValueError("virtual boundary normals must point from region 2 into region 1")
        probe1 = self.cavity.midpoints + h * self.cavity.normals
        if not np.all(point_in_curves(probe1, loop)):
            raise ValueError("cavity boundary normals must point into the fluid")

    def _in_region2(self, pts):
        return point_in_curves(pts, [self.cavity, self.virtual])

    @property
    def k(self) -> float:
        return self.wave.k

    @property
    def scatterer1(self) -> Mesh:
        return _closed_mesh(self.scatterers1)

    @property
    def scatterer2(self) -> Mesh:
        return _closed_mesh(self.scatterers2)


@dataclass
class CavityDensities:
    sigma0: np.ndarray
    sigma1: np.ndarray
    sigma2: np.ndarray
    mu: np.ndarray
    sigma_s1: np.ndarray
    sigma_s2: np.ndarray
    xi: np.ndarray
    rcond: float = float("nan")
    timings: dict = field(default_factory=dict)

    @property
    def n_unknowns(self) -> int:
        return sum(len(a) for a in (self.sigma0, self.sigma1, self.sigma2, self.mu,
                                    self.sigma_s1, self.sigma_s2, self.xi))


def _region_array(value, n):
    out = np.empty(n, dtype=object)
    if isinstance(value, Region):
        out.fill(value)
    else:
        out[:] = [Region(v) for v in value]
    return out


def classify_point(problem: CavityProblem, point):
    """Region of one point (or an array of regions for an (m, 2) array)."""
    pts = np.asarray(point, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    out = _region_array(Region.OUTSIDE, len(pts))
    in2 = problem._in_region2(pts)
    in_s1 = point_in_curves(pts, problem.scatterers1)
    in_s2 = point_in_curves(pts, problem.scatterers2)
    out[in2 & ~in_s2] = Region.OMEGA2
    out[~in2 & (pts[:, 1] > 0) & ~in_s1] = Region.OMEGA1
    d = np.full(len(pts), np.inf)
    for m in (problem.cavity, problem.virtual, *problem.scatterers1, *problem.scatterers2):
        d = np.minimum(d, distance_to_mesh(pts, m))
    outer = np.abs(pts[:, 1]) <= BOUNDARY_TOL
    on_wall = outer & ~(point_in_curves(pts + [0.0, 2 * BOUNDARY_TOL], [problem.cavity, problem.virtual])
                        & point_in_curves(pts - [0.0, 2 * BOUNDARY_TOL], [problem.cavity, problem.virtual]))
    out[(d <= BOUNDARY_TOL) | on_wall] = Region.BOUNDARY
    return out[0] if single else out


def _sources_or_zero(fn, pts, src, *args):
    if src is None:
        return np.zeros(len(pts), dtype=complex)
    return fn(pts, src, *args)


def _bm(kind_pair, x, nx, mesh, k, beta, q):
    """Burton-Miller combination of two kernel kinds, e.g. ("S", "D") or ("Dt", "N")."""
    a, b = kind_pair
    return layer_matrix(a, x, nx, mesh, k, q) + beta * layer_matrix(b, x, nx, mesh, k, q)


def solve_cavity_with_scatterers(problem: CavityProblem, method="schur") -> CavityDensities:
    """Assemble and solve the coupled cavity system with optional scatterers."""
    t0 = perf_counter()
    k, beta, q = problem.k, problem.beta, problem.quad_order
    rule, M0 = problem.rule, problem.trunc.M0
    g0 = problem.wall
    g1 = problem.cavity.flipped()
    g2 = problem.virtual
    s1 = problem.scatterer1.flipped()
    s2 = problem.scatterer2.flipped()
    x01, x02 = problem.source1, problem.source2
    sizes = [len(g0), len(g1), len(g2), len(g2), len(s1), len(s2)]
    off = np.concatenate([[0], np.cumsum(sizes)])
    b0, b1, b2, bm, bs1, bs2 = (slice(off[i], off[i + 1]) for i in range(6))
    r2p, r2g = b2, bm
    nr = off[-1]
    W = window(g0.midpoints[:, 0], M0)
    Wv = W if problem.window_virtual else np.ones_like(W)

    A = np.zeros((nr, nr), dtype=complex)
    f = np.zeros(nr, dtype=complex)
    x0p = g0.midpoints
    x1p, n1p = g1.midpoints, g1.normals
    x2p, n2p = g2.midpoints, g2.normals
    xs1, ns1 = s1.midpoints, s1.normals
    xs2, ns2 = s2.midpoints, s2.normals
    I2 = np.eye(len(g2))

    # wall rows: normal derivative of u1 on the whole line
    A[b0, b0] = 0.5 * np.eye(len(g0))
    A[b0, b2] = layer_matrix("Dt", x0p, WALL_NORMAL, g2, k, q)
    A[b0, bm] = layer_matrix("N", x0p, WALL_NORMAL, g2, k, q)
    f[b0] = -_sources_or_zero(kernel_dGdnx, x0p, x01, WALL_NORMAL, k)

    # cavity rows: normal derivative of u2 on Gamma1
    A[b1, b1] = 0.5 * np.eye(len(g1)) + layer_matrix("Dt", x1p, n1p, g1, k, q)
    A[b1, b2] = layer_matrix("Dt", x1p, n1p, g2, k, q)
    A[b1, bm] = layer_matrix("N", x1p, n1p, g2, k, q)
    f[b1] = -_sources_or_zero(kernel_dGdnx, x1p, x02, n1p, k)

    # virtual rows: u1 - u2 = 0 and du1/dn - du2/dn = 0
    A[r2p, b0] = layer_matrix("S", x2p, None, g0, k, q) * Wv[None, :]
    A[r2p, b1] = -layer_matrix("S", x2p, None, g1, k, q)
    A[r2p, bm] = I2
    f[r2p] = (_sources_or_zero(kernel_G, x2p, x02, k) - _sources_or_zero(kernel_G, x2p, x01, k))
    A[r2g, b0] = -layer_matrix("Dt", x2p, n2p, g0, k, q) * Wv[None, :]
    A[r2g, b1] = layer_matrix("Dt", x2p, n2p, g1, k, q)
    A[r2g, b2] = I2
    f[r2g] = (_sources_or_zero(kernel_dGdnx, x2p, x01, n2p, k)
              - _sources_or_zero(kernel_dGdnx, x2p, x02, n2p, k))

    if len(s1):
        A[b0, bs1] = _bm(("Dt", "N"), x0p, WALL_NORMAL, s1, k, beta, q)
        A[r2p, bs1] = _bm(("S", "D"), x2p, None, s1, k, beta, q)
        A[r2g, bs1] = -_bm(("Dt", "N"), x2p, n2p, s1, k, beta, q)
        A[bs1, b0] = layer_matrix("Dt", xs1, ns1, g0, k, q) * W[None, :]
        A[bs1, bs1] = 0.5 * np.eye(len(s1)) + _bm(("Dt", "N"), xs1, ns1, s1, k, beta, q)
        A[bs1, b2] = layer_matrix("Dt", xs1, ns1, g2, k, q)
        A[bs1, bm] = layer_matrix("N", xs1, ns1, g2, k, q)
        f[bs1] = -_sources_or_zero(kernel_dGdnx, xs1, x01, ns1, k)
    if len(s2):
        A[b1, bs2] = _bm(("Dt", "N"), x1p, n1p, s2, k, beta, q)
        A[r2p, bs2] = -_bm(("S", "D"), x2p, None, s2, k, beta, q)
        A[r2g, bs2] = _bm(("Dt", "N"), x2p, n2p, s2, k, beta, q)
        A[bs2, b1] = layer_matrix("Dt", xs2, ns2, g1, k, q)
        A[bs2, bs2] = 0.5 * np.eye(len(s2)) + _bm(("Dt", "N"), xs2, ns2, s2, k, beta, q)
        A[bs2, b2] = layer_matrix("Dt", xs2, ns2, g2, k, q)
        A[bs2, bm] = layer_matrix("N", xs2, ns2, g2, k, q)
        f[bs2] = -_sources_or_zero(kernel_dGdnx, xs2, x02, ns2, k)

    rows = np.concatenate([np.arange(off[2], off[4]), np.arange(off[4], off[5])])

    def B_nodes(sl):
        parts = [field_matrix_F(rule, x2p, k, sl), -field_matrix_H(rule, x2p, n2p, k, sl)]
        if len(s1):
            parts.append(field_matrix_H(rule, xs1, ns1, k, sl))
        return np.vstack(parts)

    def C_nodes(sl):
        C = np.zeros((len(rule.lam[sl]), nr), dtype=complex)
        C[:, b0] = 0.5 * windowed_transform_matrix(g0, M0, rule, sl)
        C[:, b2] = layer_trace_matrix("Dt", g2, rule, k, q, sl)
        C[:, bm] = layer_trace_matrix("N", g2, rule, k, q, sl)
        if len(s1):
            C[:, bs1] = (layer_trace_matrix("Dt", s1, rule, k, q, sl)
                         + beta * layer_trace_matrix("N", s1, rule, k, q, sl))
        return C

    g = np.zeros(rule.n, dtype=complex) if x01 is None else -fourier_of_source(x01, rule, k)[1]
    t1 = perf_counter()
    u, xi, rcond = solve_hybrid(A, f, g, rows, B_nodes, C_nodes, method)
    t2 = perf_counter()
    return CavityDensities(u[b0], u[b1], u[b2], u[bm], u[bs1], u[bs2], xi, rcond,
                           {"assemble": t1 - t0, "solve": t2 - t1})


def solve_cavity(problem: CavityProblem, method="schur") -> CavityDensities:
    """Solve the cavity system (no scatterers allowed)."""
    if problem.scatterers1 or problem.scatterers2:
        raise ValueError("use solve_cavity_with_scatterers for problems with scatterers")
    return solve_cavity_with_scatterers(problem, method)


def _region1_field(problem, dens, pts, on_panel="error"):
    k, q, beta = problem.k, problem.quad_order, problem.beta
    W = window(problem.wall.midpoints[:, 0], problem.trunc.M0)
    u = _sources_or_zero(kernel_G, pts, problem.source1, k)
    u = u + eval_layer("S", problem.wall, W * dens.sigma0, pts, k, q, on_panel=on_panel)
    u = u + eval_F(problem.rule, dens.xi, pts, k)
    u = u + eval_layer("S", problem.virtual, dens.sigma2, pts, k, q)
    u = u + eval_layer("D", problem.virtual, dens.mu, pts, k, q)
    if len(dens.sigma_s1):
        s1 = problem.scatterer1.flipped()
        u = u + eval_layer("S", s1, dens.sigma_s1, pts, k, q)
        u = u + beta * eval_layer("D", s1, dens.sigma_s1, pts, k, q)
    return u


def _region2_field(problem, dens, pts, on_panel="error"):
    k, q, beta = problem.k, problem.quad_order, problem.beta
    u = _sources_or_zero(kernel_G, pts, problem.source2, k)
    u = u + eval_layer("S", problem.cavity.flipped(), dens.sigma1, pts, k, q, on_panel=on_panel)
    u = u + eval_layer("S", problem.virtual, dens.sigma2, pts, k, q)
    u = u + eval_layer("D", problem.virtual, dens.mu, pts, k, q)
    if len(dens.sigma_s2):
        s2 = problem.scatterer2.flipped()
        u = u + eval_layer("S", s2, dens.sigma_s2, pts, k, q)
        u = u + beta * eval_layer("D", s2, dens.sigma_s2, pts, k, q)
    return u


def eval_total_field_cavity(problem: CavityProblem, dens: CavityDensities, points, regions=None):
    """Total field at fluid points, each evaluated with its region's representation.

    ``regions`` may force the representation per point (used for traces and
    continuity checks); by default points are classified and anything outside
    the fluid or on a boundary is rejected.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if regions is None:
        regions = classify_point(problem, pts)
        bad = (regions != Region.OMEGA1) & (regions != Region.OMEGA2)
        if np.any(bad):
            raise ValueError(f"{int(bad.sum())} point(s) lie outside the fluid or on a boundary")
    else:
        regions = _region_array(regions, len(pts))
    out = np.zeros(len(pts), dtype=complex)
    m1 = regions == Region.OMEGA1
    m2 = regions == Region.OMEGA2
    if np.any(m1):
        out[m1] = _region1_field(problem, dens, pts[m1])
    if np.any(m2):
        out[m2] = _region2_field(problem, dens, pts[m2])
    return out


def cavity_residuals(problem: CavityProblem, dens: CavityDensities, eps=1e-3):
    """|u(x) - u(x + eps n)| on physical boundary nodes, n pointing into the fluid.

    Returns ``(x_wall, r_wall, x_cav, r_cav)`` for wall nodes outside the
    virtual boundary (region 1) and for cavity nodes (region 2). Offset points
    are evaluated with the representation of the region they fall in, which
    matters next to the virtual boundary's endpoints.
    """
    ends = np.sort([problem.virtual.p0[0, 0], problem.virtual.p1[-1, 0]])
    xw = problem.wall.midpoints
    keep = (xw[:, 0] < ends[0]) | (xw[:, 0] > ends[1])
    xw = xw[keep]
    offw = xw + eps * problem.wall.normals[keep]
    rw = np.abs(_region1_field(problem, dens, xw, on_panel="own")
                - _offset_field(problem, dens, offw, Region.OMEGA1))
    xc = problem.cavity.midpoints
    offc = xc + eps * problem.cavity.normals
    rc = np.abs(_region2_field(problem, dens, xc, on_panel="own")
                - _offset_field(problem, dens, offc, Region.OMEGA2))
    return xw, rw, xc, rc


def _offset_field(problem, dens, pts, default):
    reg = classify_point(problem, pts)
    fluid = (reg == Region.OMEGA1) | (reg == Region.OMEGA2)
    return eval_total_field_cavity(problem, dens, pts, np.where(fluid, reg, default))


def intensity_sum(problem: CavityProblem, dens: CavityDensities, x_range=(-5.0, 5.0),
                  y_range=(-2.1, 8.0), shape=(41, 41), mask=None):
    """Sum of |u|^2 over fluid lattice points of a rectangle.

    ``mask`` is an optional callable selecting points, e.g. ``lambda p: p[:, 0] > 0``.
    Lattice points outside the fluid or on a boundary are skipped.
    """
    xs = np.linspace(x_range[0], x_range[1], shape[0])
    ys = np.linspace(y_range[0], y_range[1], shape[1])
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    if mask is not None:
        pts = pts[np.asarray(mask(pts), dtype=bool)]
    reg = classify_point(problem, pts)
    ok = (reg == Region.OMEGA1) | (reg == Region.OMEGA2)
    src = [s for s in (problem.source1, problem.source2) if s is not None]
    for s in src:
        ok &= np.hypot(*(pts - s).T) > 1e-9
    u = eval_total_field_cavity(problem, dens, pts[ok], reg[ok])
    return float(np.sum(np.abs(u) ** 2))


# ---------------------------------------------------------------------------
# geometry builders
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Grading:
    """Panel sizes: ``h_max`` away from corners, ``h_min`` at corners, growth ``ratio``."""

    h_max: float
    h_min: float
    ratio: float = 1.15

    @classmethod
    def for_wave(cls, k, per_wavelength=40.0, corner_fraction=1e-5, ratio=1.15):
        h = 2.0 * np.pi / (k * per_wavelength)
        return cls(h, h * corner_fraction, ratio)


def _graded_line(x0, x1, foci, g: Grading, role):
    """Panels on y = 0 from x0 to x1, refined toward the x positions in ``foci``."""
    L = x1 - x0
    rel = [abs(f - x0) for f in foci if min(x0, x1) - 1e-12 <= f <= max(x0, x1) + 1e-12]
    s = graded_breakpoints(abs(L), rel, g.h_min, g.h_max, g.ratio)
    xs = x0 + np.sign(L) * s
    return polyline(np.column_stack([xs, np.zeros_like(xs)]), role)


def _graded_wall(M0, stops, foci, g: Grading):
    xs = np.unique(np.concatenate([[-M0, M0], [b for b in stops if -M0 < b < M0]]))
    return concatenate([_graded_line(a, b, foci, g, Role.WALL) for a, b in zip(xs[:-1], xs[1:])], Role.WALL)


def _graded_arc(center, radius, th0, th1, g: Grading, role, grade_ends=True):
    """Arc from th0 to th1 (left normals), refined toward both end points."""
    L = radius * abs(th1 - th0)
    s = graded_breakpoints(L, [0.0, L] if grade_ends else [], g.h_min, g.h_max, g.ratio)
    th = th0 + np.sign(th1 - th0) * s / radius
    pts = np.asarray(center, dtype=float) + radius * np.column_stack([np.cos(th), np.sin(th)])
    pts[0] = np.asarray(center) + radius * np.array([np.cos(th0), np.sin(th0)])
    pts[-1] = np.asarray(center) + radius * np.array([np.cos(th1), np.sin(th1)])
    return polyline(pts, role)


def _virtual_semicircle(radius, g: Grading):
    return _graded_arc([0.0, 0.0], radius, 0.0, np.pi, g, Role.VIRTUAL).flipped()


def _grading(wave, per_wavelength, corner_fraction, ratio):
    return Grading.for_wave(wave.k, per_wavelength, corner_fraction, ratio)


def half_disc_cavity(wave: WaveParams, trunc: TruncationParams = TruncationParams(),
                     cavity_radius=1.0, virtual_radius=3.0, per_wavelength=40.0,
                     corner_fraction=1e-5, ratio=1.15, **kw) -> CavityProblem:
    """Half-disc indentation of radius ``cavity_radius`` under a semicircular Gamma2.

    Panels are refined toward the corners where Gamma2 meets the wall and
    where the cavity meets the flat wall, starting from ``corner_fraction``
    times the nominal panel length.
    """
    rc, r2 = cavity_radius, virtual_radius
    if not 0 < rc < r2:
        raise ValueError("need 0 < cavity_radius < virtual_radius")
    g = _grading(wave, per_wavelength, corner_fraction, ratio)
    foci = (-r2, -rc, rc, r2)
    cavity = concatenate([
        _graded_line(-r2, -rc, foci, g, Role.CAVITY),
        _graded_arc([0.0, 0.0], rc, np.pi, 2 * np.pi, g, Role.CAVITY),
        _graded_line(rc, r2, foci, g, Role.CAVITY),
    ], Role.CAVITY)
    wall = _graded_wall(trunc.M0, (-r2, r2), foci, g)
    virtual = _virtual_semicircle(r2, g)
    return CavityProblem(wave, wall, cavity, virtual, trunc=trunc, **kw)


def flat_cavity(wave: WaveParams, trunc: TruncationParams = TruncationParams(),
                virtual_radius=3.0, per_wavelength=40.0, corner_fraction=1e-5, ratio=1.15,
                **kw) -> CavityProblem:
    """Degenerate cavity: Gamma1 is the flat wall under Gamma2."""
    r2 = virtual_radius
    g = _grading(wave, per_wavelength, corner_fraction, ratio)
    foci = (-r2, r2)
    cavity = _graded_line(-r2, r2, foci, g, Role.CAVITY)
    wall = _graded_wall(trunc.M0, foci, foci, g)
    virtual = _virtual_semicircle(r2, g)
    return CavityProblem(wave, wall, cavity, virtual, trunc=trunc, **kw)


def resonator_cavity(wave: WaveParams, trunc: TruncationParams = TruncationParams(),
                     center_depth=1.0, opening=0.1, virtual_radius=3.0, per_wavelength=40.0,
                     corner_fraction=1e-5, mouth_panel=None, ratio=1.15, **kw) -> CavityProblem:
    """Circular cavity centred at (0, -center_depth) cut by the wall with a mouth of width ``opening``.

    The circle radius is sqrt(center_depth^2 + (opening/2)^2) so that it meets
    y = 0 exactly at x = +-opening/2.  Panels are refined toward the mouth
    corners, starting from ``mouth_panel`` (default opening / 10), and toward
    the ends of the virtual boundary.
    """
    r2 = virtual_radius
    half = 0.5 * opening
    radius = float(np.hypot(center_depth, half))
    g = _grading(wave, per_wavelength, corner_fraction, ratio)
    gm = Grading(g.h_max, min(g.h_min, opening / 10 if mouth_panel is None else mouth_panel), ratio)
    foci = (-r2, -half, half, r2)
    delta = np.arctan2(half, center_depth)
    arc = _graded_arc([0.0, -center_depth], radius, 0.5 * np.pi + delta, 2.5 * np.pi - delta, gm, Role.CAVITY)
    cavity = concatenate([
        _graded_line(-r2, -half, foci, gm, Role.CAVITY),
        arc,
        _graded_line(half, r2, foci, gm, Role.CAVITY),
    ], Role.CAVITY)
    wall = _graded_wall(trunc.M0, foci, foci, gm)
    virtual = _virtual_semicircle(r2, g)
    return CavityProblem(wave, wall, cavity, virtual, trunc=trunc, **kw)
