"""Straight constant-element meshes.

Every panel carries one collocation node at its midpoint.  Unless stated
otherwise the normal of a panel is the *left* normal of its traversal
direction; builders traverse so that normals point into the fluid.  Solvers
flip the normals of physical boundaries internally where the integral
equations need them directed out of the fluid.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "Role",
    "Panel",
    "Mesh",
    "WaveParams",
    "discretize_segment",
    "discretize_circle",
    "discretize_arc",
    "grade_segment",
    "concatenate",
    "panel_count",
    "point_in_curves",
    "graded_breakpoints",
    "polyline",
    "distance_to_mesh",
]


class Role(str, Enum):
    WALL = "wall"
    SCATTERER = "scatterer"
    CAVITY = "cavity"
    VIRTUAL = "virtual"


@dataclass(frozen=True)
class Panel:
    p0: np.ndarray
    p1: np.ndarray
    normal: np.ndarray

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.p0 + self.p1)

    @property
    def length(self) -> float:
        return float(np.hypot(*(self.p1 - self.p0)))


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


class Mesh:
    """Ordered list of straight panels sharing a boundary role.

    Parameters
    ----------
    p0, p1 : (n, 2) arrays
        Panel start and end points.
    role : Role
    normals : (n, 2) array, optional
        Unit normals; default is the left normal of p0 -> p1.
    closed : bool
        Whether the panels form a closed curve.
    """

    def __init__(self, p0, p1, role=Role.WALL, normals=None, closed=False):
        p0 = np.atleast_2d(np.asarray(p0, dtype=float))
        p1 = np.atleast_2d(np.asarray(p1, dtype=float))
        if p0.shape != p1.shape or p0.shape[1] != 2:
            raise ValueError("p0 and p1 must both have shape (n, 2)")
        d = p1 - p0
        h = np.hypot(d[:, 0], d[:, 1])
        if p0.shape[0] and np.any(h <= 0.0):
            raise ValueError("zero-length panel")
        t = d / h[:, None] if len(h) else d
        if normals is None:
            normals = np.column_stack([-t[:, 1], t[:, 0]]) if len(h) else np.zeros((0, 2))
        normals = np.atleast_2d(np.asarray(normals, dtype=float)).reshape(-1, 2)
        if normals.shape != p0.shape:
            raise ValueError("normals must match panel count")
        if len(h):
            if not np.allclose(np.hypot(normals[:, 0], normals[:, 1]), 1.0, atol=1e-12):
                raise ValueError("normals must be unit vectors")
            if np.max(np.abs(np.sum(normals * t, axis=1))) > 1e-10:
                raise ValueError("normals must be perpendicular to their panels")
        self.p0 = _frozen(p0)
        self.p1 = _frozen(p1)
        self.normals = _frozen(normals)
        self.lengths = _frozen(h)
        self.tangents = _frozen(t)
        self.midpoints = _frozen(0.5 * (p0 + p1))
        self.role = Role(role)
        self.closed = bool(closed)

    def __len__(self) -> int:
        return self.p0.shape[0]

    def __getitem__(self, i) -> Panel:
        return Panel(self.p0[i], self.p1[i], self.normals[i])

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def __repr__(self) -> str:
        return f"Mesh(role={self.role.value}, n={len(self)}, closed={self.closed})"

    @property
    def total_length(self) -> float:
        return float(self.lengths.sum())

    @property
    def max_length(self) -> float:
        return float(self.lengths.max()) if len(self) else 0.0

    def flipped(self) -> "Mesh":
        """Same panels with normals reversed (order is kept)."""
        return Mesh(self.p0, self.p1, self.role, -self.normals, self.closed)

    def mirrored(self) -> "Mesh":
        """Reflection across the line y = 0, normals reflected too."""
        flip = np.array([1.0, -1.0])
        return Mesh(self.p0 * flip, self.p1 * flip, self.role, self.normals * flip, self.closed)

    def with_role(self, role) -> "Mesh":
        return Mesh(self.p0, self.p1, role, self.normals, self.closed)

    def fingerprint(self) -> bytes:
        return self.p0.tobytes() + self.p1.tobytes() + self.normals.tobytes()

    def gauss_points(self, order: int):
        """Gauss-Legendre nodes (n, q, 2) and physical weights (n, q)."""
        s, w = np.polynomial.legendre.leggauss(order)
        u = 0.5 * (s + 1.0)
        pts = self.p0[:, None, :] + u[None, :, None] * (self.p1 - self.p0)[:, None, :]
        return pts, 0.5 * w[None, :] * self.lengths[:, None]


def panel_count(length: float, k: float, per_wavelength: float, minimum: int = 1) -> int:
    """Panels needed so that each is at most one ``per_wavelength``-th of 2 pi / k."""
    return max(minimum, int(np.ceil(length * k * per_wavelength / (2.0 * np.pi) - 1e-9)))


def discretize_segment(p0, p1, n_panels: int, role=Role.WALL) -> Mesh:
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    if n_panels < 1:
        raise ValueError("n_panels must be >= 1")
    if np.hypot(*(p1 - p0)) == 0.0:
        raise ValueError("zero-length segment")
    u = np.linspace(0.0, 1.0, n_panels + 1)
    nodes = p0 + u[:, None] * (p1 - p0)
    return Mesh(nodes[:-1], nodes[1:], role)


def discretize_circle(center, radius: float, n_panels: int, role=Role.SCATTERER) -> Mesh:
    """Inscribed regular polygon with outward normals (clockwise traversal)."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    if n_panels < 3:
        raise ValueError("a closed circle needs at least 3 panels")
    c = np.asarray(center, dtype=float)
    th = -2.0 * np.pi * np.arange(n_panels + 1) / n_panels
    nodes = c + radius * np.column_stack([np.cos(th), np.sin(th)])
    nodes[-1] = nodes[0]
    return Mesh(nodes[:-1], nodes[1:], role, closed=True)


def discretize_arc(center, radius: float, theta_start: float, theta_end: float,
                   n_panels: int, role=Role.CAVITY) -> Mesh:
    """Open polygonal arc from ``theta_start`` to ``theta_end``.

    End points lie exactly on the arc.  Normals are left normals of the
    traversal, i.e. toward the centre when theta increases.
    """
    if n_panels < 1:
        raise ValueError("n_panels must be >= 1")
    if theta_start == theta_end:
        raise ValueError("empty arc")
    if radius <= 0:
        raise ValueError("radius must be positive")
    c = np.asarray(center, dtype=float)
    th = np.linspace(theta_start, theta_end, n_panels + 1)
    nodes = c + radius * np.column_stack([np.cos(th), np.sin(th)])
    return Mesh(nodes[:-1], nodes[1:], role)


def _graded_lengths(length, n, ratio, max_length):
    """n lengths growing geometrically from the first, capped, summing to length."""
    if n * max_length < length * (1 - 1e-12):
        raise ValueError("segment too long for n_panels at this maximum length")
    g = ratio ** np.arange(n)

    def total(h0):
        return np.minimum(h0 * g, max_length).sum()

    lo, hi = 0.0, length
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if total(mid) < length:
            lo = mid
        else:
            hi = mid
    h = np.minimum(hi * g, max_length)
    return h * (length / h.sum())


def grade_segment(p0, p1, focus, ratio: float, n_panels: int,
                  max_length: float = np.inf, role=Role.WALL) -> Mesh:
    """Segment mesh whose panels grow geometrically away from ``focus``.

    The focus is projected onto the segment.  An interior focus splits the
    panel budget between the two sides in proportion to their lengths.
    """
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    d = p1 - p0
    L = float(np.hypot(*d))
    if L == 0.0:
        raise ValueError("zero-length segment")
    if ratio <= 1.0:
        raise ValueError("grading ratio must exceed 1")
    if n_panels < 1:
        raise ValueError("n_panels must be >= 1")
    s = float(np.dot(np.asarray(focus, dtype=float) - p0, d) / L)
    if s < -1e-12 * L or s > L * (1 + 1e-12):
        raise ValueError("focus must project inside the segment")
    s = min(max(s, 0.0), L)
    tol = 1e-9 * L
    if s <= tol:
        cuts = np.concatenate([[0.0], np.cumsum(_graded_lengths(L, n_panels, ratio, max_length))])
    elif s >= L - tol:
        cuts = L - np.concatenate([[0.0], np.cumsum(_graded_lengths(L, n_panels, ratio, max_length))])[::-1]
    else:
        if n_panels < 2:
            raise ValueError("an interior focus needs at least 2 panels")
        n_left = int(min(max(round(n_panels * s / L), 1), n_panels - 1))
        left = s - np.concatenate([[0.0], np.cumsum(_graded_lengths(s, n_left, ratio, max_length))])[::-1]
        right = s + np.cumsum(_graded_lengths(L - s, n_panels - n_left, ratio, max_length))
        cuts = np.concatenate([left, right])
    cuts[0], cuts[-1] = 0.0, L
    nodes = p0 + (cuts / L)[:, None] * d
    return Mesh(nodes[:-1], nodes[1:], role)


def graded_breakpoints(length: float, foci: Sequence[float], h_min: float, h_max: float,
                       ratio: float = 1.2) -> np.ndarray:
    """Nodes on [0, length] whose spacing grows geometrically away from ``foci``.

    The local spacing is about min(h_max, h_min + (ratio - 1) d) with d the
    distance to the nearest focus; nodes are rescaled to end exactly at
    ``length``.
    """
    if length <= 0 or h_min <= 0 or h_max < h_min or ratio <= 1.0:
        raise ValueError("need length > 0, 0 < h_min <= h_max and ratio > 1")
    foci = np.asarray(list(foci), dtype=float)

    def size(s):
        if not len(foci):
            return h_max
        return min(h_max, h_min + (ratio - 1.0) * np.min(np.abs(foci - s)))

    nodes = [0.0]
    s = 0.0
    while s < length * (1 - 1e-12):
        h = size(s)
        h = size(s + 0.5 * h)
        s += h
        nodes.append(s)
    nodes = np.asarray(nodes)
    if len(nodes) > 2 and nodes[-1] - length > 0.5 * (nodes[-1] - nodes[-2]):
        nodes = nodes[:-1]
    return nodes * (length / nodes[-1])


def polyline(points, role=Role.WALL, closed=False) -> Mesh:
    """Mesh through consecutive ``points`` (left normals)."""
    pts = np.asarray(points, dtype=float)
    return Mesh(pts[:-1], pts[1:], role, closed=closed)


def concatenate(meshes: Sequence[Mesh], role=None, closed: bool = False) -> Mesh:
    """Join meshes into one (panel order and normals preserved)."""
    meshes = [m for m in meshes if len(m)]
    if not meshes:
        return Mesh(np.zeros((0, 2)), np.zeros((0, 2)), role or Role.WALL, np.zeros((0, 2)))
    role = role if role is not None else meshes[0].role
    return Mesh(
        np.vstack([m.p0 for m in meshes]),
        np.vstack([m.p1 for m in meshes]),
        role,
        np.vstack([m.normals for m in meshes]),
        closed,
    )


@dataclass(frozen=True)
class WaveParams:
    """Time-harmonic wave parameters; k = omega / c."""

    omega: float
    c: float = 1.0

    def __post_init__(self):
        if not (self.omega > 0 and self.c > 0):
            raise ValueError("omega and c must be positive")

    @property
    def k(self) -> float:
        return self.omega / self.c

    @classmethod
    def from_k(cls, k: float, c: float = 1.0) -> "WaveParams":
        return cls(omega=k * c, c=c)

    @property
    def wavelength(self) -> float:
        return 2.0 * np.pi / self.k


def point_in_curves(points, meshes: Sequence[Optional[Mesh]]) -> np.ndarray:
    """Even-odd ray test against the union of all panels of ``meshes``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    segs = [m for m in meshes if m is not None and len(m)]
    inside = np.zeros(len(pts), dtype=bool)
    if not segs:
        return inside
    a = np.vstack([m.p0 for m in segs])
    b = np.vstack([m.p1 for m in segs])
    px, py = pts[:, 0:1], pts[:, 1:2]
    ay, by = a[None, :, 1], b[None, :, 1]
    crosses = (ay > py) != (by > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = a[None, :, 0] + (py - ay) * (b[None, :, 0] - a[None, :, 0]) / (by - ay)
    hits = crosses & (px < xint)
    return (hits.sum(axis=1) % 2) == 1


def distance_to_mesh(points, mesh: Mesh) -> np.ndarray:
    """Euclidean distance from each point to the nearest panel of ``mesh``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if not len(mesh):
        return np.full(len(pts), np.inf)
    out = np.empty(len(pts))
    step = max(1, 2_000_000 // len(mesh))
    for i in range(0, len(pts), step):
        p = pts[i:i + step, None, :]
        rel = p - mesh.p0[None]
        s = np.clip(np.einsum("mnj,nj->mn", rel, mesh.tangents), 0.0, mesh.lengths[None])
        closest = mesh.p0[None] + s[..., None] * mesh.tangents[None]
        out[i:i + step] = np.hypot(*(p - closest).transpose(2, 0, 1)).min(axis=1)
    return out
