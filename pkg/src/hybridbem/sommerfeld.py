"""Windowed Sommerfeld-integral machinery on the wall line y = 0.

Fourier convention: f^(lambda) = int f(x) exp(-i lambda x) dx, with inverse
(1/2pi) int f^ exp(i lambda x) dlambda.  With s = sommerfeld_sqrt(lambda, k)
the fundamental solution of a source at (x0, y0), y0 > 0, transforms on y = 0
to exp(-s y0) exp(-i lambda x0) / (2 s).

All spectral trace kernels below are normal derivatives on the wall taken with
the normal (0, -1), i.e. pointing out of the upper half-plane.
"""

from dataclasses import dataclass, field

import numpy as np

from .geometry import Mesh
from .specfun import contour_node, erf, sommerfeld_sqrt

__all__ = [
    "TruncationParams",
    "SommerfeldRule",
    "window",
    "build_rule",
    "rule_for_extent",
    "contour_length_integral",
    "field_matrix_F",
    "field_matrix_H",
    "eval_F",
    "eval_H",
    "fourier_of_source",
    "spectral_kernel",
    "windowed_transform_matrix",
    "fourier_of_windowed_density",
    "layer_trace_matrix",
    "fourier_of_layer_trace",
]

_CHUNK = 2_000_000


@dataclass(frozen=True)
class TruncationParams:
    """Window half-width ``M0``, Fourier truncation ``N0`` and contour parameter ``a``."""

    M0: float = 20.0
    N0: float = 30.0
    a: float = 2.0

    def __post_init__(self):
        if not (self.M0 > 0 and self.N0 > 0 and self.a > 0):
            raise ValueError("M0, N0 and a must all be positive")


@dataclass(frozen=True, eq=False)
class SommerfeldRule:
    """Trapezoid rule on the deformed contour lambda(t), t in [-N0, N0]."""

    t: np.ndarray
    lam: np.ndarray
    dlam: np.ndarray
    w: np.ndarray
    a: float
    key: bytes = field(repr=False, default=b"")

    @property
    def n(self) -> int:
        return len(self.t)

    @property
    def N0(self) -> float:
        return float(self.t[-1])

    @property
    def measure(self) -> np.ndarray:
        """Complex weights w_j * dlambda/dt_j."""
        return self.w * self.dlam

    def sqrt(self, k):
        return sommerfeld_sqrt(self.lam, k)


def window(x, M0):
    """Smooth erf window, 1 near the origin and about 1/2 at |x| = M0 / 2."""
    if M0 <= 0:
        raise ValueError("M0 must be positive")
    x = np.asarray(x, dtype=float)
    out = 0.5 * (erf(x + 0.5 * M0) - erf(x - 0.5 * M0))
    return out if np.ndim(out) else float(out)


def build_rule(N0, a, density) -> SommerfeldRule:
    """Uniform trapezoid rule with at least ``density`` nodes per unit t.

    The interval count is even so that t = 0 is always a node.
    """
    if density <= 0:
        raise ValueError("density must be positive")
    if N0 <= 0:
        raise ValueError("N0 must be positive")
    half = max(1, int(np.ceil(N0 * density - 1e-9)))
    n_int = 2 * half
    t = np.linspace(-N0, N0, n_int + 1)
    t[half] = 0.0
    dt = 2.0 * N0 / n_int
    w = np.full(t.shape, dt)
    w[0] = w[-1] = 0.5 * dt
    lam, dlam = contour_node(t, a)
    for arr in (t, lam, dlam, w):
        arr.setflags(write=False)
    key = np.array([N0, a, n_int], dtype=float).tobytes()
    return SommerfeldRule(t, lam, dlam, w, float(a), key)


def rule_for_extent(trunc: TruncationParams, extent: float = 0.0, points_per_period: float = 40.0):
    """Rule resolving exp(i lambda x) for |x| up to max(M0, extent)."""
    x_max = max(trunc.M0, float(extent))
    return build_rule(trunc.N0, trunc.a, points_per_period * x_max / (2.0 * np.pi))


def contour_length_integral(N0, a) -> complex:
    """Exact value of the integral of 1 along the contour: 2 N0 - 2i tanh(N0)/a."""
    return complex(2.0 * N0, -2.0 * np.tanh(N0) / a)


def _check_upper(points):
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if np.any(pts[:, 1] < 0):
        raise ValueError("Sommerfeld fields are defined for y >= 0 only")
    return pts


def field_matrix_F(rule: SommerfeldRule, points, k, nodes=slice(None)) -> np.ndarray:
    """(m, n_lambda) matrix mapping nodal spectral densities to F values."""
    pts = _check_upper(points)
    lam = rule.lam[nodes]
    s = sommerfeld_sqrt(lam, k)
    c = rule.measure[nodes] / (4.0 * np.pi * s)
    return np.exp(-np.outer(pts[:, 1], s) + 1j * np.outer(pts[:, 0], lam)) * c


def field_matrix_H(rule: SommerfeldRule, points, normals, k, nodes=slice(None)) -> np.ndarray:
    """(m, n_lambda) matrix of the normal derivative of F along ``normals``."""
    pts = _check_upper(points)
    nrm = np.broadcast_to(np.asarray(normals, dtype=float), pts.shape)
    lam = rule.lam[nodes]
    s = sommerfeld_sqrt(lam, k)
    c = rule.measure[nodes] / (4.0 * np.pi * s)
    fac = 1j * np.outer(nrm[:, 0], lam) - np.outer(nrm[:, 1], s)
    return fac * np.exp(-np.outer(pts[:, 1], s) + 1j * np.outer(pts[:, 0], lam)) * c


def eval_F(rule: SommerfeldRule, xi, points, k) -> np.ndarray:
    """Sommerfeld field (1/4pi) sum w lambda' exp(-s y + i lambda x) xi / s."""
    pts = _check_upper(points)
    xi = np.asarray(xi, dtype=complex)
    out = np.empty(len(pts), dtype=complex)
    step = max(1, _CHUNK // rule.n)
    for i in range(0, len(pts), step):
        out[i:i + step] = field_matrix_F(rule, pts[i:i + step], k) @ xi
    return out


def eval_H(rule: SommerfeldRule, xi, points, normals, k) -> np.ndarray:
    """Normal derivative of the Sommerfeld field."""
    pts = _check_upper(points)
    nrm = np.broadcast_to(np.asarray(normals, dtype=float), pts.shape)
    xi = np.asarray(xi, dtype=complex)
    out = np.empty(len(pts), dtype=complex)
    step = max(1, _CHUNK // rule.n)
    for i in range(0, len(pts), step):
        out[i:i + step] = field_matrix_H(rule, pts[i:i + step], nrm[i:i + step], k) @ xi
    return out


def _lam(rule_or_lam):
    return rule_or_lam.lam if isinstance(rule_or_lam, SommerfeldRule) else np.asarray(rule_or_lam, dtype=complex)


def fourier_of_source(x0, rule_or_lam, k):
    """Wall-line transforms of a point source at ``x0``.

    Returns
    -------
    ghat : ndarray
        Transform of G(., x0) on y = 0.
    dghat : ndarray
        Transform of its normal derivative with normal (0, -1).
    """
    x0 = np.asarray(x0, dtype=float)
    if x0[1] <= 0:
        raise ValueError("source must lie strictly above the wall line")
    lam = _lam(rule_or_lam)
    s = sommerfeld_sqrt(lam, k)
    base = np.exp(-s * x0[1] - 1j * lam * x0[0])
    return base / (2.0 * s), -0.5 * base


def spectral_kernel(kind, lam, s, y, ny=None):
    """Wall-line transforms (n_lambda, m) of kernel contributions from source points ``y``.

    ``kind`` is ``"S"``, ``"D"`` (source normal ``ny``), ``"Dt"`` (wall normal
    derivative of S) or ``"N"`` (wall normal derivative of D).
    """
    y = np.atleast_2d(np.asarray(y, dtype=float))
    lam = lam[:, None]
    s = s[:, None]
    base = np.exp(-s * y[None, :, 1] - 1j * lam * y[None, :, 0])
    if kind == "S":
        return base / (2.0 * s)
    if kind == "Dt":
        return -0.5 * base
    ny = np.broadcast_to(np.asarray(ny, dtype=float), y.shape)
    if kind == "D":
        return (-1j * lam * ny[None, :, 0] - s * ny[None, :, 1]) * base / (2.0 * s)
    if kind == "N":
        return (1j * lam * ny[None, :, 0] + s * ny[None, :, 1]) * 0.5 * base
    raise ValueError(f"unknown kernel kind {kind!r}")


def windowed_transform_matrix(mesh: Mesh, M0, rule: SommerfeldRule, nodes=slice(None)) -> np.ndarray:
    """(n_lambda, n_panels) matrix W(x_c) * integral of exp(-i lambda x) over each panel.

    The window is sampled at the panel midpoint x_c, the same value that scales
    the real-space wall columns, so that W sigma and (1 - W) sigma split the
    piecewise-constant density exactly.  The panel integral is evaluated in
    closed form, h exp(-i lambda x_c) sinc(lambda h / 2).  ``nodes`` selects a
    subset of the rule nodes.
    """
    if len(mesh) and np.max(np.abs(np.concatenate([mesh.p0[:, 1], mesh.p1[:, 1]]))) > 0:
        raise ValueError("windowed transform needs a wall mesh on y = 0")
    lam = rule.lam[nodes][:, None]
    xc = mesh.midpoints[None, :, 0]
    h = mesh.lengths[None, :]
    wh = (window(mesh.midpoints[:, 0], M0) * mesh.lengths)[None, :]
    return wh * np.exp(-1j * lam * xc) * np.sinc(lam * h / (2.0 * np.pi))


def fourier_of_windowed_density(mesh: Mesh, sigma, M0, rule: SommerfeldRule):
    """Samples of the transform of W(x_c) * sigma for a piecewise-constant wall density."""
    sigma = np.asarray(sigma, dtype=complex)
    out = np.empty(rule.n, dtype=complex)
    step = max(1, _CHUNK // max(1, len(mesh)))
    for i in range(0, rule.n, step):
        sl = slice(i, i + step)
        out[sl] = windowed_transform_matrix(mesh, M0, rule, sl) @ sigma
    return out


def layer_trace_matrix(kind, mesh: Mesh, rule: SommerfeldRule, k, quad_order=10,
                       nodes=slice(None)) -> np.ndarray:
    """(n_lambda, n_panels) wall-line transform of the ``kind`` trace of each panel."""
    if len(mesh) and np.min(np.concatenate([mesh.p0[:, 1], mesh.p1[:, 1]])) < 0:
        raise ValueError("source panels must lie in y >= 0")
    pts, wts = mesh.gauss_points(quad_order)
    n, q = wts.shape
    flat = pts.reshape(-1, 2)
    nrm = np.repeat(mesh.normals, q, axis=0)
    lam_all = rule.lam[nodes]
    s_all = sommerfeld_sqrt(lam_all, k)
    out = np.empty((len(lam_all), n), dtype=complex)
    step = max(1, _CHUNK // max(1, n * q))
    for i in range(0, len(lam_all), step):
        K = spectral_kernel(kind, lam_all[i:i + step], s_all[i:i + step], flat, nrm)
        out[i:i + step] = (K.reshape(-1, n, q) * wts[None]).sum(axis=-1)
    return out


def fourier_of_layer_trace(kind, mesh: Mesh, density, rule: SommerfeldRule, k, quad_order=10):
    """Samples of the wall-line transform of a layer potential trace."""
    return layer_trace_matrix(kind, mesh, rule, k, quad_order) @ np.asarray(density, dtype=complex)
