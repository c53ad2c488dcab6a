"""Reference solutions and error metrics.

The image-method references are independent of the hybrid machinery: they
use the exact half-space Green function G(x, y) + G(x, y*) with y* the mirror
image of y across the wall, so the rigid-wall condition holds identically.
"""

from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from .geometry import Mesh, point_in_curves
from .halfspace import SolverError, lu_solve
from .potentials import eval_layer, kernel_dGdnx, kernel_G, layer_matrix

__all__ = [
    "ErrorReport",
    "image_field_empty",
    "ImageBEMSolution",
    "image_bem_scatterer",
    "relative_error",
    "l1_relative_errors",
    "bc_residual",
]

_MIRROR = np.array([1.0, -1.0])


@dataclass
class ErrorReport:
    """Summary of a validation run (all values non-negative)."""

    relative_error: float
    l1_real: float = float("nan")
    l1_imag: float = float("nan")
    max_bc_residual: float = float("nan")
    n_points: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


def image_field_empty(x0, k, points) -> np.ndarray:
    """u_in(x; x0) + u_in(x; mirror(x0))."""
    x0 = np.asarray(x0, dtype=float)
    if x0[1] <= 0:
        raise ValueError("source must satisfy y0 > 0")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return kernel_G(pts, x0, k) + kernel_G(pts, x0 * _MIRROR, k)


@dataclass
class ImageBEMSolution:
    mesh: Mesh
    x0: np.ndarray
    k: float
    beta: complex
    sigma: np.ndarray
    rcond: float
    quad_order: int = 10

    def field(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if np.any(pts[:, 1] <= 0):
            raise ValueError("field points must satisfy y > 0")
        if len(self.mesh) and np.any(point_in_curves(pts, [self.mesh])):
            raise ValueError("field point inside the scatterer")
        u = image_field_empty(self.x0, self.k, pts)
        if not len(self.mesh):
            return u
        phys = self.mesh.flipped()
        q = self.quad_order
        for m in (phys, phys.mirrored()):
            u = u + eval_layer("S", m, self.sigma, pts, self.k, q)
            u = u + self.beta * eval_layer("D", m, self.sigma, pts, self.k, q)
        return u

    def trace(self) -> np.ndarray:
        """Total field on the scatterer nodes (fluid side)."""
        phys = self.mesh.flipped()
        xs, k, q, s = phys.midpoints, self.k, self.quad_order, self.sigma
        u = image_field_empty(self.x0, k, xs)
        mir = phys.mirrored()
        u = u + (layer_matrix("S", xs, None, phys, k, q) + layer_matrix("S", xs, None, mir, k, q)) @ s
        dmat = layer_matrix("D", xs, None, phys, k, q) + layer_matrix("D", xs, None, mir, k, q)
        return u + self.beta * (dmat @ s - 0.5 * s)


def image_bem_scatterer(mesh: Mesh, x0, k, beta=None, points=None, quad_order=10):
    """Burton-Miller collocation BEM for a scatterer over a rigid wall.

    ``mesh`` is closed with outward normals.  Returns the solution object, or
    field values at ``points`` when they are given.
    """
    x0 = np.asarray(x0, dtype=float)
    beta = -1j / k if beta is None else beta
    if len(mesh) and np.min(mesh.p0[:, 1]) <= 0:
        raise ValueError("scatterer must lie in y > 0")
    if not len(mesh):
        sol = ImageBEMSolution(mesh, x0, k, beta, np.zeros(0, complex), 1.0, quad_order)
    else:
        phys = mesh.flipped()
        mir = phys.mirrored()
        xs, ns = phys.midpoints, phys.normals
        A = 0.5 * np.eye(len(phys), dtype=complex)
        for m in (phys, mir):
            A += layer_matrix("Dt", xs, ns, m, k, quad_order)
            A += beta * layer_matrix("N", xs, ns, m, k, quad_order)
        rhs = -(kernel_dGdnx(xs, x0, ns, k) + kernel_dGdnx(xs, x0 * _MIRROR, ns, k))
        sigma, rcond = lu_solve(A, rhs)
        sol = ImageBEMSolution(mesh, x0, k, beta, sigma, rcond, quad_order)
    return sol if points is None else sol.field(points)


def relative_error(p, c) -> float:
    """sum |p - c| / sum |c|."""
    p = np.asarray(p, dtype=complex).ravel()
    c = np.asarray(c, dtype=complex).ravel()
    if p.shape != c.shape:
        raise ValueError("arrays must have equal length")
    den = np.abs(c).sum()
    if den == 0:
        raise ValueError("reference is identically zero")
    return float(np.abs(p - c).sum() / den)


def l1_relative_errors(p, c):
    """L1 relative errors of the real and imaginary parts separately."""
    p = np.asarray(p, dtype=complex).ravel()
    c = np.asarray(c, dtype=complex).ravel()
    if p.shape != c.shape:
        raise ValueError("arrays must have equal length")
    out = []
    for part in (np.real, np.imag):
        den = np.abs(part(c)).sum()
        if den == 0:
            raise ValueError("reference part is identically zero")
        out.append(float(np.abs(part(p) - part(c)).sum() / den))
    return tuple(out)


def bc_residual(field: Callable, mesh: Mesh, eps=1e-3, normals=None,
                inside: Optional[Callable] = None) -> np.ndarray:
    """|u(x) - u(x + eps n)| at collocation nodes, with n pointing into the fluid.

    ``field`` maps an (m, 2) array of points to values and must accept points
    on the boundary.  ``inside`` optionally checks that offset points stay in
    the fluid.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    x = mesh.midpoints
    n = mesh.normals if normals is None else np.broadcast_to(normals, x.shape)
    off = x + eps * n
    if inside is not None and not np.all(inside(off)):
        raise ValueError("offset points leave the fluid region")
    return np.abs(field(x) - field(off))
