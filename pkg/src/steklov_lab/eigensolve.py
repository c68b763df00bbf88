"""Discrete Steklov and Steklov-Dirichlet spectra.

The generalized problem  K u = sigma M_b u  has a boundary mass supported on
the outer loop only, so interior unknowns are eliminated first: the Schur
complement of K onto the outer vertices is the discrete Dirichlet-to-Neumann
map, and its pencil with the outer mass is small, dense and definite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg as la
import scipy.sparse.linalg as spla

from .discretize import (
    SymmetricOperator,
    apply_dirichlet,
    assemble_boundary_mass,
    assemble_domain_mass,
    assemble_full_boundary_mass,
    assemble_stiffness,
)
from .errors import HoleRequired, NotPositiveDefinite, SingularInterior
from .geometry import Marker, Mesh

CLUSTER_GAP = 1e-3


class Mode(str, Enum):
    STEKLOV = "steklov"
    STEKLOV_DIRICHLET = "steklov_dirichlet"


@dataclass(eq=False)
class SpectralResult:
    """Ascending eigenvalues with eigenfields on the full vertex set.

    ``eigenfields[k]`` is normalised to unit L2 norm on the outer boundary;
    ``clusters`` groups indices of numerically coincident eigenvalues.
    """

    mode: Mode
    eigenvalues: np.ndarray
    eigenfields: np.ndarray
    clusters: list[list[int]]
    mesh: Mesh = field(repr=False)

    @property
    def multiplicities(self) -> list[int]:
        return [len(c) for c in self.clusters]

    def cluster_of(self, index: int) -> list[int]:
        for c in self.clusters:
            if index in c:
                return c
        raise IndexError(index)


def _factorize_spd(A):
    """Sparse direct factorization of an SPD matrix with a fill-reducing ordering."""
    try:
        lu = spla.splu(
            A.tocsc(),
            permc_spec="MMD_AT_PLUS_A",
            diag_pivot_thresh=0.0,
            options={"SymmetricMode": True},
        )
    except RuntimeError as exc:
        raise SingularInterior(f"interior factorization failed: {exc}") from exc
    d = lu.U.diagonal()
    if np.any(d <= 0) or not np.all(np.isfinite(d)):
        raise SingularInterior("interior block is not positive definite")
    return lu


def schur_dtn(stiffness: SymmetricOperator, mesh: Mesh, *, return_extension: bool = False):
    """S = A_GG - A_GI A_II^{-1} A_IG with G the outer vertices.

    With ``return_extension`` also returns (outer_dofs, interior_dofs, E)
    where E maps outer values to the discrete harmonic interior values.
    """
    outer_mask = mesh.vertex_markers[stiffness.dof_map] == Marker.OUTER
    G = np.flatnonzero(outer_mask)
    I = np.flatnonzero(~outer_mask)
    A = stiffness.matrix
    A_GG = A[G][:, G].toarray()
    if len(I) == 0:
        S = A_GG
        E = np.zeros((0, len(G)))
    else:
        A_II = A[I][:, I]
        A_IG = A[I][:, G].toarray()
        lu = _factorize_spd(A_II)
        E = -lu.solve(A_IG)
        S = A_GG + A_IG.T @ E
    S = 0.5 * (S + S.T)
    if return_extension:
        return S, G, I, E
    return S


def jacobi_eigh(A: np.ndarray, tol: float = 1e-12, max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi diagonalisation of a symmetric matrix.

    Pairs are scheduled round-robin: in each round position k is paired with
    position m-1-k, all m/2 disjoint rotations are applied at once, and the
    positions are then cycled (first one fixed) so that every pair of indices
    meets exactly once per sweep. Stops once the off-diagonal Frobenius norm
    is below ``tol`` times the Frobenius norm.
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    if n == 1:
        return A.diagonal().copy(), np.ones((1, 1))
    m = n + (n % 2)
    if m != n:
        # a decoupled zero row keeps the schedule regular
        A = np.pad(A, ((0, 1), (0, 1)))
    scale = np.linalg.norm(A)
    if scale == 0:
        return np.zeros(n), np.eye(n)
    h = m // 2
    V = np.eye(m)
    labels = np.arange(m)  # labels[k] = original index stored at position k
    cycle = np.concatenate([[0, m - 1], np.arange(1, m - 1)])
    ip = np.arange(h)
    iq = np.arange(m - 1, h - 1, -1)
    for _ in range(max_sweeps):
        # direct sum: ||A||^2 - ||diag A||^2 cancels once off^2 reaches eps * ||A||^2
        D = A.copy()
        np.fill_diagonal(D, 0.0)
        off = np.linalg.norm(D)
        if off <= tol * scale:
            break
        for _ in range(m - 1):
            apq = A[ip, iq]
            app = A[ip, ip]
            aqq = A[iq, iq]
            active = apq != 0
            with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
                # theta overflows to inf for denormal apq, giving t = 0 as intended
                theta = (aqq - app) / (2 * np.where(active, apq, 1.0))
                t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0))
            t = np.where(active, t, 0.0)
            c = 1.0 / np.hypot(t, 1.0)
            s = t * c
            for M in (A, V):
                P = M[:, :h]
                Q = M[:, h:][:, ::-1]
                newP = c * P - s * Q
                Q[...] = s * P + c * Q
                P[...] = newP
            P = A[:h]
            Q = A[h:][::-1]
            newP = c[:, None] * P - s[:, None] * Q
            Q[...] = s[:, None] * P + c[:, None] * Q
            P[...] = newP
            A[ip, iq] = 0.0
            A[iq, ip] = 0.0
            A = A.take(cycle, axis=0).take(cycle, axis=1)
            V = V.take(cycle, axis=1)
            labels = labels[cycle]
    # undo the position bookkeeping
    w = np.empty(m)
    w[labels] = A.diagonal()
    W = np.empty_like(V)
    W[:, labels] = V
    # the padding index never rotates (its couplings are exactly zero)
    w, W = w[:n], W[:n, :n]
    order = np.argsort(w, kind="stable")
    return w[order], W[:, order]


def generalized_sym_eig(S: np.ndarray, B: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Solve S x = sigma B x for symmetric S and SPD B; B-orthonormal x, ascending sigma."""
    S = np.asarray(S, dtype=float)
    B = np.asarray(B, dtype=float)
    try:
        L = la.cholesky(0.5 * (B + B.T), lower=True)
    except la.LinAlgError as exc:
        raise NotPositiveDefinite(f"boundary mass is not positive definite: {exc}") from exc
    Y = la.solve_triangular(L, S, lower=True)
    C = la.solve_triangular(L, Y.T, lower=True)
    C = 0.5 * (C + C.T)
    w, V = jacobi_eigh(C)
    X = la.solve_triangular(L.T, V, lower=False)
    return w, X


def find_clusters(values: np.ndarray, gap: float = CLUSTER_GAP) -> list[list[int]]:
    clusters: list[list[int]] = []
    for i, v in enumerate(values):
        if clusters and abs(v - values[i - 1]) <= gap * max(abs(v), abs(values[i - 1])):
            clusters[-1].append(i)
        else:
            clusters.append([i])
    return clusters


def _orient(fields: np.ndarray, outer: np.ndarray, B_outer: np.ndarray, first_by_mean: bool) -> None:
    for k, u in enumerate(fields):
        if k == 0 and first_by_mean:
            sign = np.sign(np.sum(B_outer @ u[outer]))
        else:
            vals = u[np.sort(outer)]
            big = np.flatnonzero(np.abs(vals) > 1e-12 * np.abs(vals).max())
            sign = np.sign(vals[big[0]]) if len(big) else 1.0
        if sign < 0:
            fields[k] = -u


def _solve(mesh: Mesh, stiffness: SymmetricOperator, mode: Mode, k: int, drop_constant: bool) -> SpectralResult:
    S, G, I, E = schur_dtn(stiffness, mesh, return_extension=True)
    outer = stiffness.dof_map[G]
    Bfull = assemble_boundary_mass(mesh, Marker.OUTER).matrix
    B = Bfull[outer][:, outer].toarray()
    w, X = generalized_sym_eig(S, B)
    if drop_constant:
        if not abs(w[0]) < 1e-9 * abs(w[1]):
            raise SingularInterior(f"constant Steklov mode not resolved (sigma_0 = {w[0]:.3e})")
        w, X = w[1:], X[:, 1:]
    count = min(k, len(w))
    # clusters over all modes so a degenerate pair is not split at index k
    clusters = [c for c in find_clusters(w) if c[0] < count]
    clusters[-1] = [i for i in clusters[-1] if i < count]
    w, X = w[:count], X[:, :count]
    fields = np.zeros((count, mesh.n_vertices))
    fields[:, outer] = X.T
    if len(I):
        fields[:, stiffness.dof_map[I]] = (E @ X).T
    _orient(fields, outer, B, first_by_mean=mode is Mode.STEKLOV_DIRICHLET)
    return SpectralResult(mode, w, fields, clusters, mesh)


def solve_steklov_dirichlet(mesh: Mesh, k: int = 6) -> SpectralResult:
    """First ``k`` eigenpairs: Steklov on the outer loop, u = 0 on the hole."""
    if len(mesh.marked_vertices(Marker.INNER)) == 0:
        raise HoleRequired("Steklov-Dirichlet solve needs a mesh with an inner boundary")
    K = apply_dirichlet(assemble_stiffness(mesh), mesh)
    return _solve(mesh, K, Mode.STEKLOV_DIRICHLET, k, drop_constant=False)


def solve_steklov(mesh: Mesh, k: int = 6) -> SpectralResult:
    """First ``k`` non-trivial Steklov eigenpairs (the constant mode is dropped)."""
    return _solve(mesh, assemble_stiffness(mesh), Mode.STEKLOV, k, drop_constant=True)


def friedrich_constant(mesh: Mesh, tol: float = 1e-13, max_iter: int = 500) -> float:
    """Best C with ||u||^2_{L2(Omega)} <= C (||grad u||^2 + ||u||^2_{L2(dOmega)}).

    Inverse iteration for the smallest eigenvalue of
    (K + M_boundary) u = lambda M u; the constant is 1 / lambda.
    """
    A = (assemble_stiffness(mesh).matrix + assemble_full_boundary_mass(mesh).matrix).tocsc()
    M = assemble_domain_mass(mesh).matrix
    lu = _factorize_spd(A)
    u = np.ones(mesh.n_vertices)
    lam = np.inf
    for _ in range(max_iter):
        y = lu.solve(M @ u)
        u = y / np.sqrt(y @ (M @ y))
        new = float(u @ (A @ u))
        if abs(new - lam) <= tol * new:
            lam = new
            break
        lam = new
    return 1.0 / lam
