"""Nodal domains of discrete eigenfields.

Vertices with ``|f| <= tol * max|f|`` are neutral; the others carry the sign
of f. Two same-sign vertices joined by a mesh edge lie in the same nodal
domain of the piecewise-linear interpolant, and every nodal domain of the
interpolant contains a vertex, so the edge-connected components of
same-sign vertices are exactly its nodal domains.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .eigensolve import SpectralResult
from .errors import AllNeutral, NotApplicable
from .geometry import Marker, Mesh

DEFAULT_TOL = 1e-8


class DisjointSet:
    """Union-find whose representative is always the smallest member."""

    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            lo, hi = (ra, rb) if ra < rb else (rb, ra)
            self.parent[hi] = lo


@dataclass(frozen=True)
class NodalEntry:
    nodal_count: int
    inner_signs: frozenset[str]
    zero_tolerance: float


@dataclass
class NodalReport:
    entries: list[NodalEntry]
    multiplicities: list[int] = field(default_factory=list)


def mesh_edges(mesh: Mesh) -> np.ndarray:
    """Unique vertex pairs (a, b), a < b, sorted."""
    cached = mesh._cache.get("edges")
    if cached is not None:
        return cached
    t = mesh.triangles
    edges = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    edges.sort(axis=1)
    edges = np.unique(edges, axis=0)
    mesh._cache["edges"] = edges
    return edges


def vertex_signs(f: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    sign = np.sign(f).astype(int)
    sign[np.abs(f) <= tol * np.abs(f).max()] = 0
    return sign


def count_nodal_domains(mesh: Mesh, f: np.ndarray, tol: float = DEFAULT_TOL) -> NodalEntry:
    sign = vertex_signs(f, tol)
    if not np.any(sign):
        raise AllNeutral(f"every vertex is neutral at tolerance {tol}")
    dsu = DisjointSet(len(sign))
    edges = mesh_edges(mesh)
    same = (sign[edges[:, 0]] != 0) & (sign[edges[:, 0]] == sign[edges[:, 1]])
    for a, b in edges[same].tolist():
        dsu.union(a, b)
    count = len({dsu.find(i) for i in np.flatnonzero(sign).tolist()})

    inner = np.zeros(mesh.n_vertices, dtype=bool)
    inner[mesh.marked_vertices(Marker.INNER)] = True
    near = np.unique(mesh.triangles[inner[mesh.triangles].any(axis=1)])
    touching = sign[near]
    signs = frozenset(s for s, v in (("+", 1), ("-", -1)) if np.any(touching == v))
    return NodalEntry(count, signs, tol)


def nodal_report(result: SpectralResult, tol: float = DEFAULT_TOL) -> NodalReport:
    entries = [count_nodal_domains(result.mesh, u, tol) for u in result.eigenfields]
    return NodalReport(entries, result.multiplicities)


def hole_adjacency_check(entry: NodalEntry) -> bool:
    """For a two-domain eigenfield, both signs must reach the hole.

    Discrete stand-in for the fact that no nodal domain of a higher
    eigenfunction can enclose the hole.
    """
    if entry.nodal_count != 2:
        raise NotApplicable(f"check applies to two-domain fields, got {entry.nodal_count} domains")
    return entry.inner_signs == frozenset({"+", "-"})


def nodal_bound_check(spectral: SpectralResult, nodal: NodalReport, levels: int | None = None) -> list[bool]:
    """Per cluster l+1: max nodal count in the cluster <= 1 + sum of earlier multiplicities."""
    verdicts = []
    below = 0
    clusters = spectral.clusters if levels is None else spectral.clusters[:levels]
    for cluster in clusters:
        worst = max(nodal.entries[i].nodal_count for i in cluster)
        verdicts.append(worst <= 1 + below)
        below += len(cluster)
    return verdicts
