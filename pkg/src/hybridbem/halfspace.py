"""Rigid half-space scattering by the hybrid layer-potential / Sommerfeld system.

Representation in the fluid y > 0::

    u = u_in + S_wall[W sigma] + F[xi] + (S + beta D)_scat[sigma_s]

Unknowns are the wall density ``sigma`` (one value per wall panel), the
scatterer density ``sigma_s`` and nodal samples ``xi`` of the spectral density
at the contour nodes.  Meshes store normals pointing into the fluid; the
integral equations use normals pointing out of the fluid, so physical
boundaries are flipped internally.
"""

from dataclasses import dataclass, field
from time import perf_counter
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from .geometry import Mesh, Role, WaveParams, concatenate, discretize_segment, panel_count, point_in_curves
from .potentials import eval_layer, kernel_dGdnx, kernel_G, layer_matrix
from .sommerfeld import (
    SommerfeldRule,
    TruncationParams,
    eval_F,
    field_matrix_H,
    fourier_of_windowed_density,
    fourier_of_source,
    layer_trace_matrix,
    rule_for_extent,
    window,
    windowed_transform_matrix,
)

__all__ = [
    "SolverError",
    "HalfspaceProblem",
    "DensitySolution",
    "make_wall",
    "solve_halfspace_empty",
    "assemble_and_solve",
    "eval_total_field",
    "scatterer_trace",
    "lu_solve",
    "solve_hybrid",
    "wall_trace",
    "boundary_residuals",
]

WALL_NORMAL = np.array([0.0, -1.0])


class SolverError(RuntimeError):
    """Raised when a linear system is singular to working precision."""

    def __init__(self, message, rcond=None):
        super().__init__(message if rcond is None else f"{message} (rcond={rcond:.3e})")
        self.rcond = rcond


def lu_solve(A, b, overwrite=False):
    """Dense LU with partial pivoting; returns (x, rcond) with rcond in the 1-norm."""
    A = np.asarray(A, dtype=complex)
    if A.shape[0] == 0:
        return np.zeros(0, dtype=complex), 1.0
    anorm = np.linalg.norm(A, 1)
    lu, piv, info = linalg.lapack.zgetrf(A, overwrite_a=overwrite)
    if info > 0:
        raise SolverError("exactly singular system matrix", 0.0)
    rcond, _ = linalg.lapack.zgecon(lu, anorm, norm="1")
    if not np.isfinite(rcond) or rcond < np.finfo(float).eps:
        raise SolverError("system matrix is singular to working precision", float(rcond))
    x, _ = linalg.lapack.zgetrs(lu, piv, np.asarray(b, dtype=complex))
    return x, float(rcond)


def make_wall(M0, k, per_wavelength=40.0, breakpoints=(), role=Role.WALL) -> Mesh:
    """Uniform wall mesh on (-M0, M0) x {0}, split at the given x breakpoints."""
    xs = np.unique(np.concatenate([[-M0, M0], [b for b in breakpoints if -M0 < b < M0]]))
    parts = []
    for x0, x1 in zip(xs[:-1], xs[1:]):
        n = panel_count(x1 - x0, k, per_wavelength)
        parts.append(discretize_segment([x0, 0.0], [x1, 0.0], n, role))
    return concatenate(parts, role)


@dataclass
class HalfspaceProblem:
    """Point source over a rigid wall with optional rigid scatterers.

    Parameters
    ----------
    wave : WaveParams
    source : (2,) array
        Source position, y > 0.
    wall : Mesh
        Panels on y = 0 covering (-M0, M0); normals (0, 1).
    scatterers : sequence of Mesh
        Closed meshes with outward normals.
    trunc : TruncationParams
    beta : complex, optional
        Burton-Miller coupling, default -i/k.
    rule : SommerfeldRule, optional
        Built from ``trunc`` and ``extent`` when omitted.
    extent : float
        Largest |x| at which fields will be evaluated.
    """

    wave: WaveParams
    source: np.ndarray
    wall: Mesh
    scatterers: Sequence[Mesh] = ()
    trunc: TruncationParams = field(default_factory=TruncationParams)
    beta: Optional[complex] = None
    quad_order: int = 10
    rule: Optional[SommerfeldRule] = None
    extent: float = 0.0
    points_per_period: float = 40.0

    def __post_init__(self):
        self.source = np.asarray(self.source, dtype=float)
        if self.source[1] <= 0:
            raise ValueError("source must lie strictly above the wall")
        self.scatterers = tuple(self.scatterers)
        for m in self.scatterers:
            if not m.closed:
                raise ValueError("scatterer meshes must be closed")
            if np.min(m.p0[:, 1]) <= 0:
                raise ValueError("scatterers must lie strictly inside y > 0")
        if np.any(point_in_curves(self.source[None], self.scatterers)):
            raise ValueError("source lies inside a scatterer")
        if self.beta is None:
            self.beta = -1j / self.wave.k
        if not np.isfinite(self.beta):
            raise ValueError("beta must be finite")
        if self.rule is None:
            self.rule = rule_for_extent(self.trunc, self.extent, self.points_per_period)

    @property
    def k(self) -> float:
        return self.wave.k

    @property
    def scatterer(self) -> Mesh:
        """All scatterers as one mesh with fluid-pointing normals."""
        return concatenate(self.scatterers, Role.SCATTERER, closed=True)


@dataclass
class DensitySolution:
    sigma_wall: np.ndarray
    sigma_scat: np.ndarray
    xi: np.ndarray
    rcond: float = float("nan")
    timings: dict = field(default_factory=dict)

    @property
    def n_unknowns(self) -> int:
        return len(self.sigma_wall) + len(self.sigma_scat) + len(self.xi)


def _wall_window(problem):
    return window(problem.wall.midpoints[:, 0], problem.trunc.M0)


def solve_halfspace_empty(wave: WaveParams, source, trunc: TruncationParams, wall: Mesh,
                          rule: Optional[SommerfeldRule] = None, quad_order=10) -> DensitySolution:
    """Closed-form densities when there is no scatterer.

    The wall density is -2 du_in/dn at the wall nodes and the spectral density
    is the transform of (1 - W) sigma, computed as the source transform minus
    the windowed part.
    """
    problem = HalfspaceProblem(wave, source, wall, (), trunc, quad_order=quad_order, rule=rule)
    t0 = perf_counter()
    sigma = -2.0 * kernel_dGdnx(wall.midpoints, problem.source, WALL_NORMAL, wave.k)
    _, dghat = fourier_of_source(problem.source, problem.rule, wave.k)
    xi = -2.0 * dghat - fourier_of_windowed_density(wall, sigma, trunc.M0, problem.rule)
    return DensitySolution(sigma, np.zeros(0, dtype=complex), xi, 1.0, {"solve": perf_counter() - t0})


def solve_hybrid(A, f, g, rows, B_nodes, C_nodes, method="schur", chunk=1024):
    """Solve the block system [[A, B], [C, I/2]] [u, xi] = [f, g].

    ``B`` is non-zero only in ``rows``; ``B_nodes(sl)`` returns those rows for
    the spectral nodes ``sl`` and ``C_nodes(sl)`` the matching rows of ``C``.
    Both are generated on the fly in chunks of nodes so that the spectral
    blocks are never stored whole.

    ``method="schur"`` eliminates xi (its block is I/2) and factorises
    A - 2 B C; ``method="dense"`` factorises the full square matrix.

    Returns
    -------
    u, xi : ndarray
    rcond : float
        Reciprocal 1-norm condition estimate of the factorised matrix.
    """
    nr, nl = A.shape[0], len(g)
    rows = np.asarray(rows, dtype=int)
    chunks = [slice(i, min(i + chunk, nl)) for i in range(0, nl, chunk)]
    if method == "schur":
        S = np.array(A, dtype=complex)
        rhs = np.array(f, dtype=complex)
        if len(rows):
            for sl in chunks:
                Bc = B_nodes(sl)
                S[rows] -= 2.0 * (Bc @ C_nodes(sl))
                rhs[rows] -= 2.0 * (Bc @ g[sl])
        u, rcond = lu_solve(S, rhs, overwrite=True)
        xi = np.empty(nl, dtype=complex)
        for sl in chunks:
            xi[sl] = 2.0 * (g[sl] - C_nodes(sl) @ u)
        return u, xi, rcond
    if method == "dense":
        M = np.zeros((nr + nl, nr + nl), dtype=complex)
        M[:nr, :nr] = A
        for sl in chunks:
            cols = np.arange(sl.start, sl.stop) + nr
            if len(rows):
                M[np.ix_(rows, cols)] = B_nodes(sl)
            M[nr + sl.start:nr + sl.stop, :nr] = C_nodes(sl)
        M[nr:, nr:] += 0.5 * np.eye(nl)
        x, rcond = lu_solve(M, np.concatenate([f, g]), overwrite=True)
        return x[:nr], x[nr:], rcond
    raise ValueError(f"unknown method {method!r}")


def assemble_and_solve(problem: HalfspaceProblem, method="schur") -> DensitySolution:
    """Assemble and solve the coupled wall / scatterer / spectral system.

    Rows: wall nodes, scatterer nodes, spectral nodes; unknowns in the same
    order.  See :func:`solve_hybrid` for ``method``.
    """
    t0 = perf_counter()
    k, beta, q = problem.k, problem.beta, problem.quad_order
    rule, M0 = problem.rule, problem.trunc.M0
    wall = problem.wall
    scat = problem.scatterer.flipped()
    n0, ns = len(wall), len(scat)
    W = _wall_window(problem)
    x0 = problem.source
    xw = wall.midpoints
    xs, ns_phys = scat.midpoints, scat.normals

    A = np.zeros((n0 + ns, n0 + ns), dtype=complex)
    f = np.zeros(n0 + ns, dtype=complex)
    A[:n0, :n0] = 0.5 * np.eye(n0)
    f[:n0] = -kernel_dGdnx(xw, x0, WALL_NORMAL, k)
    if ns:
        A[:n0, n0:] = (layer_matrix("Dt", xw, WALL_NORMAL, scat, k, q)
                       + beta * layer_matrix("N", xw, WALL_NORMAL, scat, k, q))
        A[n0:, :n0] = layer_matrix("Dt", xs, ns_phys, wall, k, q) * W[None, :]
        A[n0:, n0:] = (0.5 * np.eye(ns) + layer_matrix("Dt", xs, ns_phys, scat, k, q)
                       + beta * layer_matrix("N", xs, ns_phys, scat, k, q))
        f[n0:] = -kernel_dGdnx(xs, x0, ns_phys, k)

    def B_nodes(sl):
        return field_matrix_H(rule, xs, ns_phys, k, sl)

    def C_nodes(sl):
        C = np.empty((len(rule.lam[sl]), n0 + ns), dtype=complex)
        C[:, :n0] = 0.5 * windowed_transform_matrix(wall, M0, rule, sl)
        if ns:
            C[:, n0:] = (layer_trace_matrix("Dt", scat, rule, k, q, sl)
                         + beta * layer_trace_matrix("N", scat, rule, k, q, sl))
        return C

    _, dghat = fourier_of_source(x0, rule, k)
    t1 = perf_counter()
    u, xi, rcond = solve_hybrid(A, f, -dghat, np.arange(n0, n0 + ns), B_nodes, C_nodes, method)
    t2 = perf_counter()
    return DensitySolution(u[:n0], u[n0:], xi, rcond, {"assemble": t1 - t0, "solve": t2 - t1})


def eval_total_field(problem: HalfspaceProblem, solution: DensitySolution, points) -> np.ndarray:
    """Total field at points of the fluid region (off all boundaries)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if np.any(pts[:, 1] <= 0):
        raise ValueError("field points must satisfy y > 0")
    if np.any(point_in_curves(pts, problem.scatterers)):
        raise ValueError("field point inside a scatterer")
    k, q = problem.k, problem.quad_order
    u = kernel_G(pts, problem.source, k) if len(pts) else np.zeros(0, complex)
    u = u + eval_layer("S", problem.wall, _wall_window(problem) * solution.sigma_wall, pts, k, q)
    u = u + eval_F(problem.rule, solution.xi, pts, k)
    if len(solution.sigma_scat):
        scat = problem.scatterer.flipped()
        u = u + eval_layer("S", scat, solution.sigma_scat, pts, k, q)
        u = u + problem.beta * eval_layer("D", scat, solution.sigma_scat, pts, k, q)
    return u


def scatterer_trace(problem: HalfspaceProblem, solution: DensitySolution) -> np.ndarray:
    """Total field on the scatterer collocation nodes (fluid-side limit)."""
    k, q = problem.k, problem.quad_order
    scat = problem.scatterer.flipped()
    xs = scat.midpoints
    u = kernel_G(xs, problem.source, k)
    u = u + eval_layer("S", problem.wall, _wall_window(problem) * solution.sigma_wall, xs, k, q)
    u = u + eval_F(problem.rule, solution.xi, xs, k)
    s = solution.sigma_scat
    u = u + layer_matrix("S", xs, None, scat, k, q) @ s
    u = u + problem.beta * (layer_matrix("D", xs, None, scat, k, q) @ s - 0.5 * s)
    return u


def wall_trace(problem: HalfspaceProblem, solution: DensitySolution) -> np.ndarray:
    """Total field on the wall collocation nodes."""
    k, q = problem.k, problem.quad_order
    xw = problem.wall.midpoints
    u = kernel_G(xw, problem.source, k)
    u = u + layer_matrix("S", xw, None, problem.wall, k, q) @ (_wall_window(problem) * solution.sigma_wall)
    u = u + eval_F(problem.rule, solution.xi, xw, k)
    if len(solution.sigma_scat):
        scat = problem.scatterer.flipped()
        u = u + eval_layer("S", scat, solution.sigma_scat, xw, k, q)
        u = u + problem.beta * eval_layer("D", scat, solution.sigma_scat, xw, k, q)
    return u


def boundary_residuals(problem: HalfspaceProblem, solution: DensitySolution, eps=1e-3):
    """|u(x) - u(x + eps n)| on wall and scatterer nodes, n pointing into the fluid."""
    wall = problem.wall
    r_wall = np.abs(wall_trace(problem, solution)
                    - eval_total_field(problem, solution, wall.midpoints + eps * wall.normals))
    if not len(solution.sigma_scat):
        return r_wall, np.zeros(0)
    scat = problem.scatterer
    r_scat = np.abs(scatterer_trace(problem, solution)
                    - eval_total_field(problem, solution, scat.midpoints + eps * scat.normals))
    return r_wall, r_scat
