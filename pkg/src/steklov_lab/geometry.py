"""Star-shaped perforated domains and their polar triangulations.

The outer boundary of every domain is a polar graph ``|x| = rho(theta)``
around the origin, and the hole is the disk ``|x| <= r`` centred there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DegenerateCell, InvalidSpec

# periodic trapezoid nodes for analytic functionals; spectrally accurate for smooth rho
_QUAD_ANGLES = 8192
_VALIDATION_ANGLES = 4096


class Marker(IntEnum):
    INTERIOR = 0
    OUTER = 1
    INNER = 2


class Outer:
    """Radius function of a domain that is star-shaped w.r.t. the origin."""

    def radius(self, theta):
        raise NotImplementedError

    def radius_derivative(self, theta):
        raise NotImplementedError

    def scaled(self, t: float) -> "Outer":
        raise NotImplementedError


@dataclass(frozen=True)
class Disk(Outer):
    R: float

    def radius(self, theta):
        return np.full_like(np.asarray(theta, dtype=float), self.R)

    def radius_derivative(self, theta):
        return np.zeros_like(np.asarray(theta, dtype=float))

    def scaled(self, t):
        return Disk(self.R * t)


@dataclass(frozen=True)
class Ellipse(Outer):
    """Axis-aligned ellipse with semi-axes ``a`` (along x) and ``b`` (along y)."""

    a: float
    b: float

    def radius(self, theta):
        theta = np.asarray(theta, dtype=float)
        q = (self.b * np.cos(theta)) ** 2 + (self.a * np.sin(theta)) ** 2
        return self.a * self.b / np.sqrt(q)

    def radius_derivative(self, theta):
        theta = np.asarray(theta, dtype=float)
        q = (self.b * np.cos(theta)) ** 2 + (self.a * np.sin(theta)) ** 2
        dq = (self.a**2 - self.b**2) * np.sin(2 * theta)
        return -0.5 * self.a * self.b * dq / q**1.5

    def scaled(self, t):
        return Ellipse(self.a * t, self.b * t)


@dataclass(frozen=True)
class StarShaped(Outer):
    """rho(theta) = c0 + sum_k a_k cos(k theta) + b_k sin(k theta), k = 1..K."""

    c0: float
    a: tuple[float, ...] = ()
    b: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))

    def _coeffs(self):
        K = max(len(self.a), len(self.b))
        a = np.zeros(K)
        b = np.zeros(K)
        a[: len(self.a)] = self.a
        b[: len(self.b)] = self.b
        return np.arange(1, K + 1), a, b

    def radius(self, theta):
        theta = np.asarray(theta, dtype=float)
        k, a, b = self._coeffs()
        kt = np.multiply.outer(theta, k)
        return self.c0 + np.cos(kt) @ a + np.sin(kt) @ b

    def radius_derivative(self, theta):
        theta = np.asarray(theta, dtype=float)
        k, a, b = self._coeffs()
        kt = np.multiply.outer(theta, k)
        return np.sin(kt) @ (-k * a) + np.cos(kt) @ (k * b)

    def scaled(self, t):
        return StarShaped(self.c0 * t, tuple(v * t for v in self.a), tuple(v * t for v in self.b))


@dataclass(frozen=True)
class DomainSpec:
    outer: Outer
    hole_radius: float = 0.0

    def with_hole(self, r: float) -> "DomainSpec":
        return DomainSpec(self.outer, float(r))

    def scaled(self, t: float) -> "DomainSpec":
        return DomainSpec(self.outer.scaled(t), self.hole_radius * t)

    def validate(self) -> None:
        theta = np.linspace(0.0, 2 * np.pi, _VALIDATION_ANGLES, endpoint=False)
        rho = self.outer.radius(theta)
        if not np.all(np.isfinite(rho)) or rho.min() <= 0:
            raise InvalidSpec(f"radius function not positive (min sampled value {rho.min():.6g})")
        r = self.hole_radius
        if r < 0:
            raise InvalidSpec(f"hole radius must be >= 0, got {r}")
        rmin = min_boundary_radius(self)
        if r >= rmin * (1 - 1e-9):
            raise InvalidSpec(f"hole radius {r} does not fit inside the outer boundary (min radius {rmin:.12g})")


def _quad_theta():
    return np.linspace(0.0, 2 * np.pi, _QUAD_ANGLES, endpoint=False)


def outer_area(spec: DomainSpec) -> float:
    """|Omega_0| = 1/2 * integral of rho^2 (hole not subtracted)."""
    rho = spec.outer.radius(_quad_theta())
    return float(0.5 * np.mean(rho**2) * 2 * np.pi)


def outer_perimeter(spec: DomainSpec) -> float:
    theta = _quad_theta()
    rho = spec.outer.radius(theta)
    drho = spec.outer.radius_derivative(theta)
    return float(np.mean(np.hypot(rho, drho)) * 2 * np.pi)


def ball_volume(n: int) -> float:
    """Measure of the unit ball in R^n."""
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def radius_for_measure(measure: float, n: int = 2) -> float:
    return (measure / ball_volume(n)) ** (1.0 / n)


def equivalent_radii(spec: DomainSpec) -> tuple[float, float]:
    """(R_M, R_P): radii of the disks with the area and the perimeter of Omega_0."""
    spec.validate()
    return radius_for_measure(outer_area(spec), 2), outer_perimeter(spec) / (2 * np.pi)


def min_boundary_radius(spec: DomainSpec) -> float:
    """Distance from the origin to the outer boundary."""
    n = _VALIDATION_ANGLES
    theta = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    rho = spec.outer.radius(theta)
    j = int(np.argmin(rho))
    h = 2 * np.pi / n
    res = minimize_scalar(
        lambda t: float(spec.outer.radius(t)),
        bounds=(theta[j] - h, theta[j] + h),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return float(min(res.fun, rho[j]))


def max_boundary_radius(spec: DomainSpec) -> float:
    n = _VALIDATION_ANGLES
    theta = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    rho = spec.outer.radius(theta)
    j = int(np.argmax(rho))
    h = 2 * np.pi / n
    res = minimize_scalar(
        lambda t: -float(spec.outer.radius(t)),
        bounds=(theta[j] - h, theta[j] + h),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return float(max(-res.fun, rho[j]))


@dataclass(frozen=True, eq=False)
class Mesh:
    """Conforming triangulation of Omega_r with tagged boundary loops.

    ``boundary_edges`` holds vertex pairs with the domain on the left;
    ``n_rays``/``n_radial`` and ``hole_radius`` record how it was built.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    edge_markers: np.ndarray
    vertex_markers: np.ndarray
    hole_radius: float = 0.0
    n_rays: int = 0
    n_radial: int = 0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def marked_vertices(self, marker: Marker) -> np.ndarray:
        return np.flatnonzero(self.vertex_markers == marker)

    def marked_edges(self, marker: Marker) -> np.ndarray:
        return self.boundary_edges[self.edge_markers == marker]

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def radial_fractions(n_radial: int, grading: float) -> np.ndarray:
    """Node positions t_0 = 0 < ... < t_n = 1 with geometric spacing.

    Consecutive spacings satisfy h_{k} = grading * h_{k+1}, so grading < 1
    packs the nodes towards t = 0.
    """
    k = np.arange(n_radial)
    h = float(grading) ** (n_radial - 1 - k)
    t = np.concatenate([[0.0], np.cumsum(h)])
    t /= t[-1]
    t[-1] = 1.0
    return t


def build_polar_mesh(spec: DomainSpec, n_rays: int, n_radial: int, grading: float = 0.85) -> Mesh:
    """Tensor polar grid between the hole (or the centre) and the outer boundary.

    Node (i, j) sits on ray j at radius r + t_i (rho_j - r); for r = 0 ring 0
    collapses to a single vertex at the origin.
    """
    if n_rays < 8 or n_radial < 2 or not grading > 0:
        raise InvalidSpec(f"need n_rays >= 8, n_radial >= 2, grading > 0 (got {n_rays}, {n_radial}, {grading})")
    spec.validate()
    r = float(spec.hole_radius)
    theta = 2 * np.pi * np.arange(n_rays) / n_rays
    rho = spec.outer.radius(theta)
    t = radial_fractions(n_radial, grading)
    cos, sin = np.cos(theta), np.sin(theta)

    s = r + np.outer(t, rho - r)  # (n_radial + 1, n_rays)
    pts = np.stack([s * cos, s * sin], axis=-1)
    if r > 0:
        pts[0] = np.stack([r * cos, r * sin], axis=-1)
    pts[-1] = np.stack([rho * cos, rho * sin], axis=-1)

    J = np.arange(n_rays)
    Jn = (J + 1) % n_rays
    if r > 0:
        vertices = pts.reshape(-1, 2)

        def vid(i, j):
            return i * n_rays + j

        first_ring = 0
        tris = []
    else:
        vertices = np.vstack([[0.0, 0.0], pts[1:].reshape(-1, 2)])

        def vid(i, j):
            return 1 + (i - 1) * n_rays + j

        first_ring = 1
        tris = [np.stack([np.zeros(n_rays, dtype=int), vid(1, J), vid(1, Jn)], axis=1)]

    for i in range(first_ring, n_radial):
        a, b = vid(i, J), vid(i, Jn)
        c, d = vid(i + 1, Jn), vid(i + 1, J)
        tris.append(np.stack([a, d, c], axis=1))
        tris.append(np.stack([a, c, b], axis=1))
    triangles = np.vstack(tris).astype(np.int64)

    outer_edges = np.stack([vid(n_radial, J), vid(n_radial, Jn)], axis=1)
    edges = [outer_edges]
    emark = [np.full(n_rays, Marker.OUTER)]
    vmark = np.full(len(vertices), Marker.INTERIOR, dtype=np.int8)
    vmark[vid(n_radial, J)] = Marker.OUTER
    if r > 0:
        edges.append(np.stack([vid(0, Jn), vid(0, J)], axis=1))
        emark.append(np.full(n_rays, Marker.INNER))
        vmark[vid(0, J)] = Marker.INNER

    mesh = Mesh(
        vertices=vertices,
        triangles=triangles,
        boundary_edges=np.vstack(edges).astype(np.int64),
        edge_markers=np.concatenate(emark).astype(np.int8),
        vertex_markers=vmark,
        hole_radius=r,
        n_rays=n_rays,
        n_radial=n_radial,
    )
    areas = mesh.signed_areas()
    if areas.min() <= 0:
        raise DegenerateCell(f"triangle {int(np.argmin(areas))} has non-positive area {areas.min():.3e}")
    return mesh


def area(mesh: Mesh) -> float:
    if len(mesh.triangles) == 0:
        return 0.0
    return float(np.sum(mesh.signed_areas()))


def edge_lengths(mesh: Mesh, edges: np.ndarray) -> np.ndarray:
    p = mesh.vertices[edges]
    return np.hypot(*(p[:, 1] - p[:, 0]).T)


def perimeter(mesh: Mesh, marker: Marker) -> float:
    return float(np.sum(edge_lengths(mesh, mesh.marked_edges(marker))))


def locate(mesh: Mesh, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Containing triangle and barycentric coordinates for each point.

    Uses the polar structure: only triangles of the wedge between the two
    rays bracketing the point are tested. Points just outside the polygon
    (between a chord and the curved boundary) get the nearest wedge triangle,
    i.e. linear extrapolation.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = mesh.n_rays
    if n == 0:
        raise InvalidSpec("locate() needs a mesh built by build_polar_mesh")
    wedge_tris = mesh._cache.get("wedge_tris")
    if wedge_tris is None:
        tri_per_wedge = len(mesh.triangles) // n
        order = np.arange(len(mesh.triangles)).reshape(-1, n)  # blocks of n_rays per (layer, half)
        wedge_tris = order.T.copy()  # (n_rays, tri_per_wedge)
        assert wedge_tris.shape[1] == tri_per_wedge
        mesh._cache["wedge_tris"] = wedge_tris
    ang = np.mod(np.arctan2(points[:, 1], points[:, 0]), 2 * np.pi)
    w = np.minimum((ang / (2 * np.pi) * n).astype(int), n - 1)
    cand = wedge_tris[w]  # (m, c)
    P = mesh.vertices[mesh.triangles[cand]]  # (m, c, 3, 2)
    x = points[:, None, :]
    v0 = P[..., 0, :]
    d1 = P[..., 1, :] - v0
    d2 = P[..., 2, :] - v0
    det = d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]
    q = x - v0
    l1 = (q[..., 0] * d2[..., 1] - q[..., 1] * d2[..., 0]) / det
    l2 = (d1[..., 0] * q[..., 1] - d1[..., 1] * q[..., 0]) / det
    l0 = 1 - l1 - l2
    worst = np.minimum(np.minimum(l0, l1), l2)
    best = np.argmax(worst, axis=1)
    rows = np.arange(len(points))
    tri = cand[rows, best]
    bary = np.stack([l0[rows, best], l1[rows, best], l2[rows, best]], axis=1)
    return tri, bary


_MARKER_NAMES = {Marker.INTERIOR: "interior", Marker.OUTER: "outer", Marker.INNER: "inner"}
_MARKER_BY_NAME = {v: k for k, v in _MARKER_NAMES.items()}


def write_mesh_text(mesh: Mesh, path: str | Path) -> None:
    """One record per line: ``v x y marker``, ``t i j k``, ``e i j marker``."""
    lines = [f"# steklov_lab mesh: {mesh.n_vertices} vertices, {len(mesh.triangles)} triangles"]
    for (x, y), m in zip(mesh.vertices, mesh.vertex_markers):
        lines.append(f"v {float(x):.17g} {float(y):.17g} {_MARKER_NAMES[Marker(m)]}")
    for a, b, c in mesh.triangles:
        lines.append(f"t {a} {b} {c}")
    for (a, b), m in zip(mesh.boundary_edges, mesh.edge_markers):
        lines.append(f"e {a} {b} {_MARKER_NAMES[Marker(m)]}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_mesh_text(path: str | Path) -> Mesh:
    verts, vmark, tris, edges, emark = [], [], [], [], []
    for line in Path(path).read_text().splitlines():
        if not line or line.startswith("#"):
            continue
        tag, *rest = line.split()
        if tag == "v":
            verts.append((float(rest[0]), float(rest[1])))
            vmark.append(_MARKER_BY_NAME[rest[2]])
        elif tag == "t":
            tris.append(tuple(int(v) for v in rest))
        elif tag == "e":
            edges.append((int(rest[0]), int(rest[1])))
            emark.append(_MARKER_BY_NAME[rest[2]])
    vertices = np.array(verts, dtype=float).reshape(-1, 2)
    inner = vertices[np.array(vmark) == Marker.INNER] if vmark else np.empty((0, 2))
    return Mesh(
        vertices=vertices,
        triangles=np.array(tris, dtype=np.int64).reshape(-1, 3),
        boundary_edges=np.array(edges, dtype=np.int64).reshape(-1, 2),
        edge_markers=np.array(emark, dtype=np.int8),
        vertex_markers=np.array(vmark, dtype=np.int8),
        hole_radius=float(np.hypot(*inner.T).mean()) if len(inner) else 0.0,
    )
