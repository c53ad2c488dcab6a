"""Kernels of the 2D Helmholtz fundamental solution and layer operators.

Kinds
-----
``"S"``   single layer,   G(x, y)
``"D"``   double layer,   dG/dn(y)
``"Dt"``  adjoint double, dG/dn(x)
``"N"``   hypersingular,  d2G/dn(x)dn(y)   (Hadamard finite part on-panel)

Matrices hold *direct values* only: for a collocation point on its own panel
the S entry is the (integrable) log-singular integral, D and Dt entries vanish
on straight panels and N is the finite part.  Jump terms are added by the
solvers.
"""

from math import factorial

import numpy as np
from scipy import special

from .geometry import Mesh

__all__ = [
    "KINDS",
    "kernel_G",
    "kernel_dGdny",
    "kernel_dGdnx",
    "kernel_d2G",
    "assemble_layer",
    "layer_matrix",
    "eval_layer",
]

KINDS = ("S", "D", "Dt", "N")
GAUSS_ORDER = 10
# refine a panel integral when the target is closer than this many panel lengths
NEAR_FACTOR = 1.0
_ON_PANEL_TOL = 1e-10
_CHUNK = 3_000_000


def _h0(z):
    return special.j0(z) + 1j * special.y0(z)


def _h1(z):
    return special.j1(z) + 1j * special.y1(z)


def _kernel(kind, x, nx, y, ny, k):
    """Broadcasting kernel evaluation; the last axis of every array has length 2."""
    d = x - y
    r = np.sqrt(d[..., 0] ** 2 + d[..., 1] ** 2)
    z = k * r
    if kind == "S":
        return 0.25j * _h0(z)
    h1 = _h1(z)
    if kind == "D":
        return 0.25j * k * h1 * (d[..., 0] * ny[..., 0] + d[..., 1] * ny[..., 1]) / r
    if kind == "Dt":
        return -0.25j * k * h1 * (d[..., 0] * nx[..., 0] + d[..., 1] * nx[..., 1]) / r
    if kind == "N":
        dnx = (d[..., 0] * nx[..., 0] + d[..., 1] * nx[..., 1]) / r
        dny = (d[..., 0] * ny[..., 0] + d[..., 1] * ny[..., 1]) / r
        nn = nx[..., 0] * ny[..., 0] + nx[..., 1] * ny[..., 1]
        return 0.25j * k * ((k * _h0(z) - 2.0 * h1 / r) * dnx * dny + h1 / r * nn)
    raise ValueError(f"unknown kernel kind {kind!r}")


def _points(*arrays):
    out = [np.asarray(a, dtype=float) for a in arrays]
    if np.any(np.all(out[0] == out[1], axis=-1)):
        raise ValueError("kernel evaluated at coincident points")
    return out


def kernel_G(x, y, k):
    """(i/4) H0(k|x - y|)."""
    x, y = _points(x, y)
    out = _kernel("S", x, None, y, None, k)
    return out if out.ndim else complex(out)


def kernel_dGdny(x, y, ny, k):
    """Normal derivative at the source point y: (ik/4) H1(kr) (x - y).n_y / r."""
    x, y = _points(x, y)
    out = _kernel("D", x, None, y, np.asarray(ny, dtype=float), k)
    return out if out.ndim else complex(out)


def kernel_dGdnx(x, y, nx, k):
    """Normal derivative at the target point x: -(ik/4) H1(kr) (x - y).n_x / r."""
    x, y = _points(x, y)
    out = _kernel("Dt", x, np.asarray(nx, dtype=float), y, None, k)
    return out if out.ndim else complex(out)


def kernel_d2G(x, y, nx, ny, k):
    """Mixed second normal derivative d2G / dn(x) dn(y)."""
    x, y = _points(x, y)
    out = _kernel("N", x, np.asarray(nx, dtype=float), y, np.asarray(ny, dtype=float), k)
    return out if out.ndim else complex(out)


# ---------------------------------------------------------------------------
# on-panel (singular) integrals over [0, b] measured from the target point
# ---------------------------------------------------------------------------

_NSERIES = 40
_FACT = np.array([float(factorial(m)) for m in range(_NSERIES + 2)])


def _log_series_j0(z):
    """sum_m (-1)^m z^2m / (m!^2 (2m+1)) (ln z - 1/(2m+1))."""
    z = np.asarray(z, dtype=float)
    lz = np.log(z)
    out = np.zeros_like(z)
    for m in range(_NSERIES):
        c = (-1) ** m / (_FACT[m] ** 2 * (2 * m + 1))
        out += c * z ** (2 * m) * (lz - 1.0 / (2 * m + 1))
    return out


def _log_series_j1(z):
    """sum_m (-1)^m z^(2m+1) / (m! (m+1)! (2m+1)) (ln z - 1/(2m+1))."""
    z = np.asarray(z, dtype=float)
    lz = np.log(z)
    out = np.zeros_like(z)
    for m in range(_NSERIES):
        c = (-1) ** m / (_FACT[m] * _FACT[m + 1] * (2 * m + 1))
        out += c * z ** (2 * m + 1) * (lz - 1.0 / (2 * m + 1))
    return out


_SG, _SW = np.polynomial.legendre.leggauss(16)
_SU = 0.5 * (_SG + 1.0)
_SW = 0.5 * _SW


def single_layer_half(b, k):
    """Integral of G(s) over 0 < s < b along a straight line through the target."""
    b = np.atleast_1d(np.asarray(b, dtype=float))
    out = np.zeros(b.shape, dtype=complex)
    ok = b > 0
    bb = b[ok]
    s = bb[:, None] * _SU[None, :]
    z = k * s
    smooth = 0.25j * special.j0(z) - 0.25 * special.y0(z) + np.log(0.5 * z) * special.j0(z) / (2 * np.pi)
    out[ok] = (smooth * _SW).sum(axis=1) * bb - bb * _log_series_j0(0.5 * k * bb) / (2 * np.pi)
    return out


def hypersingular_half(b, k):
    """Finite part of the integral of (ik/4) H1(ks)/s over 0 < s < b."""
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if np.any(b <= 0):
        raise ValueError("finite part undefined with the target at a panel end point")
    s = b[:, None] * _SU[None, :]
    z = k * s
    smooth = (0.25j * k * (special.j1(z) + 1j * special.y1(z)) / s
              - 1.0 / (2 * np.pi * s * s)
              + k * np.log(0.5 * z) * special.j1(z) / (2 * np.pi * s))
    return (smooth * _SW).sum(axis=1) * b - 1.0 / (2 * np.pi * b) - k * _log_series_j1(0.5 * k * b) / (2 * np.pi)


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------

def _proximity(targets, mesh):
    """Distance (m, n) from targets to panels and clamped arc position."""
    rel = targets[:, None, :] - mesh.p0[None, :, :]
    s = rel[..., 0] * mesh.tangents[None, :, 0] + rel[..., 1] * mesh.tangents[None, :, 1]
    s = np.clip(s, 0.0, mesh.lengths[None, :])
    cx = rel[..., 0] - s * mesh.tangents[None, :, 0]
    cy = rel[..., 1] - s * mesh.tangents[None, :, 1]
    return np.hypot(cx, cy), s


def _near_values(kind, x, nx, mesh, j, s, d, k, q):
    """Panel integrals by geometric subdivision toward the closest point."""
    L = mesh.lengths[j]
    levels = int(np.ceil(np.log2(np.max(L / d)))) + 2
    powers = np.concatenate([[0.0], 2.0 ** np.arange(-3, levels)])
    right = np.minimum(s[:, None] + d[:, None] * powers[None, :], L[:, None])
    left = np.maximum(s[:, None] - d[:, None] * powers[None, :], 0.0)
    a = np.concatenate([right[:, :-1], left[:, 1:]], axis=1)
    b = np.concatenate([right[:, 1:], left[:, :-1]], axis=1)
    g, w = np.polynomial.legendre.leggauss(q)
    half = 0.5 * (b - a)
    sn = 0.5 * (a + b)[..., None] + half[..., None] * g
    y = mesh.p0[j][:, None, None, :] + sn[..., None] * mesh.tangents[j][:, None, None, :]
    ny = mesh.normals[j][:, None, None, :]
    K = _kernel(kind, x[:, None, None, :], None if nx is None else nx[:, None, None, :], y, ny, k)
    return (K * (half[..., None] * w)).sum(axis=(1, 2))


def _on_panel_values(kind, nx, mesh, j, s, k):
    L = mesh.lengths[j]
    if kind == "S":
        return single_layer_half(s, k) + single_layer_half(L - s, k)
    if kind in ("D", "Dt"):
        return np.zeros(len(j), dtype=complex)
    nn = np.sum(nx * mesh.normals[j], axis=1)
    return nn * (hypersingular_half(s, k) + hypersingular_half(L - s, k))


def layer_matrix(kind, targets, target_normals, mesh: Mesh, k, quad_order=GAUSS_ORDER,
                 on_panel="own"):
    """Dense (m, n) matrix of panel integrals of ``kind`` against each target.

    ``on_panel`` controls targets lying on a panel: ``"own"`` accepts only the
    panel midpoint (collocation), ``"any"`` accepts any interior position and
    ``"error"`` rejects all.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown kernel kind {kind!r}")
    if quad_order < 1:
        raise ValueError("quad_order must be >= 1")
    X = np.atleast_2d(np.asarray(targets, dtype=float))
    NX = None
    if kind in ("Dt", "N"):
        if target_normals is None:
            raise ValueError(f"kind {kind} needs target normals")
        NX = np.broadcast_to(np.asarray(target_normals, dtype=float), X.shape)
    m, n = len(X), len(mesh)
    out = np.zeros((m, n), dtype=complex)
    if m == 0 or n == 0:
        return out
    Y, W = mesh.gauss_points(quad_order)
    NY = mesh.normals[None, :, None, :]
    step = max(1, _CHUNK // (n * quad_order))
    near_i, near_j, near_s, near_d = [], [], [], []
    with np.errstate(divide="ignore", invalid="ignore"):
        for c0 in range(0, m, step):
            sl = slice(c0, c0 + step)
            xs = X[sl, None, None, :]
            nxs = None if NX is None else NX[sl, None, None, :]
            K = _kernel(kind, xs, nxs, Y[None], NY, k)
            out[sl] = (K * W[None]).sum(axis=-1)
            d, s = _proximity(X[sl], mesh)
            ii, jj = np.nonzero(d < NEAR_FACTOR * mesh.lengths[None, :])
            near_i.append(ii + c0)
            near_j.append(jj)
            near_s.append(s[ii, jj])
            near_d.append(d[ii, jj])
    if not near_i:
        return out
    ii = np.concatenate(near_i)
    jj = np.concatenate(near_j)
    ss = np.concatenate(near_s)
    dd = np.concatenate(near_d)
    on = dd <= _ON_PANEL_TOL * mesh.lengths[jj]
    if np.any(on):
        if on_panel == "error":
            raise ValueError("evaluation point lies on a boundary panel")
        io, jo, so = ii[on], jj[on], ss[on]
        Lo = mesh.lengths[jo]
        if on_panel == "own" and np.any(np.abs(so - 0.5 * Lo) > 1e-8 * Lo):
            raise ValueError("collocation point lies on a foreign panel")
        if np.any((so <= _ON_PANEL_TOL * Lo) | (so >= (1 - _ON_PANEL_TOL) * Lo)) and kind != "S":
            raise ValueError("target coincides with a panel end point")
        nxo = None if NX is None else NX[io]
        out[io, jo] = _on_panel_values(kind, nxo, mesh, jo, so, k)
    off = ~on
    ii, jj, ss, dd = ii[off], jj[off], ss[off], dd[off]
    pstep = 4000
    for p0 in range(0, len(ii), pstep):
        sl = slice(p0, p0 + pstep)
        i, j = ii[sl], jj[sl]
        nxn = None if NX is None else NX[i]
        out[i, j] = _near_values(kind, X[i], nxn, mesh, j, ss[sl], dd[sl], k, quad_order)
    return out


def assemble_layer(kind, collocation, normals, source_mesh: Mesh, k, quad_order=GAUSS_ORDER):
    """Collocation matrix of a layer operator (jump terms excluded)."""
    return layer_matrix(kind, collocation, normals, source_mesh, k, quad_order, on_panel="own")


def eval_layer(kind, mesh: Mesh, density, points, k, quad_order=GAUSS_ORDER, normals=None,
               on_panel="error"):
    """Field of a layer potential with per-panel ``density`` at ``points``."""
    density = np.asarray(density, dtype=complex)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if density.shape != (len(mesh),):
        raise ValueError("density must have one value per panel")
    out = np.zeros(len(pts), dtype=complex)
    if len(mesh) == 0 or not np.any(density):
        if on_panel == "error" and len(mesh) and len(pts):
            d, _ = _proximity(pts, mesh)
            if np.any(d <= _ON_PANEL_TOL * mesh.lengths[None, :]):
                raise ValueError("evaluation point lies on a boundary panel")
        return out
    step = max(1, 400_000 // len(mesh))
    for c0 in range(0, len(pts), step):
        sl = slice(c0, c0 + step)
        nrm = None if normals is None else np.broadcast_to(normals, pts.shape)[sl]
        out[sl] = layer_matrix(kind, pts[sl], nrm, mesh, k, quad_order, on_panel) @ density
    return out
