import math

import numpy as np
import pytest
import scipy.linalg as la
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import brentq
from scipy.special import j0, j1

from steklov_lab.discretize import assemble_boundary_mass, assemble_stiffness, apply_dirichlet
from steklov_lab.eigensolve import (
    Mode,
    find_clusters,
    friedrich_constant,
    generalized_sym_eig,
    jacobi_eigh,
    schur_dtn,
    solve_steklov,
    solve_steklov_dirichlet,
)
from steklov_lab.errors import HoleRequired, NotPositiveDefinite
from steklov_lab.geometry import Disk, DomainSpec, Ellipse, Marker, build_polar_mesh
from steklov_lab.shells import ShellSpec, sigma1_shell, sigma2_shell


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 14).flatmap(lambda n: arrays(np.float64, (n, n), elements=st.floats(-10, 10))))
def test_jacobi_matches_lapack(a):
    A = 0.5 * (a + a.T)
    w, V = jacobi_eigh(A)
    ref = np.linalg.eigvalsh(A)
    scale = max(1.0, np.abs(ref).max())
    assert np.allclose(w, ref, atol=1e-10 * scale)
    assert np.allclose(V.T @ V, np.eye(len(w)), atol=1e-10)
    assert np.allclose(A @ V, V * w, atol=1e-9 * scale)


def test_jacobi_on_repeated_eigenvalues():
    Q, _ = np.linalg.qr(np.random.default_rng(1).standard_normal((9, 9)))
    d = np.array([1.0, 1.0, 1.0, 2.0, 2.0, 5.0, 5.0, 5.0, 5.0])
    w, V = jacobi_eigh(Q @ np.diag(d) @ Q.T)
    assert np.allclose(w, d, atol=1e-12)


def test_generalized_problem_matches_scipy():
    rng = np.random.default_rng(2)
    S = rng.standard_normal((12, 12))
    S = S + S.T
    C = rng.standard_normal((12, 12))
    B = C @ C.T + 12 * np.eye(12)
    w, X = generalized_sym_eig(S, B)
    assert np.allclose(w, la.eigh(S, B, eigvals_only=True), atol=1e-10)
    assert np.allclose(X.T @ B @ X, np.eye(12), atol=1e-10)


def test_indefinite_mass_is_rejected():
    with pytest.raises(NotPositiveDefinite):
        generalized_sym_eig(np.eye(3), np.diag([1.0, -1.0, 1.0]))


def test_find_clusters():
    assert find_clusters(np.array([1.0, 2.0, 2.0005, 2.001, 3.0])) == [[0], [1, 2, 3], [4]]
    assert find_clusters(np.array([1.0, 1.01])) == [[0], [1]]


@pytest.fixture(scope="module")
def unit_annulus():
    mesh = build_polar_mesh(DomainSpec(Disk(1.0), 0.5), 128, 32, 0.85**2)
    return solve_steklov_dirichlet(mesh, 6)


def test_annulus_matches_closed_forms(unit_annulus):
    s = ShellSpec(2, 0.5, 1.0)
    assert unit_annulus.mode is Mode.STEKLOV_DIRICHLET
    assert unit_annulus.eigenvalues[0] == pytest.approx(sigma1_shell(s), rel=2e-3)
    assert unit_annulus.clusters[1] == [1, 2]
    assert unit_annulus.eigenvalues[1:3] == pytest.approx([sigma2_shell(s)] * 2, rel=2e-3)


def test_eigenpairs_satisfy_the_full_discrete_problem(unit_annulus):
    mesh = unit_annulus.mesh
    K = apply_dirichlet(assemble_stiffness(mesh), mesh)
    Mb = assemble_boundary_mass(mesh, Marker.OUTER)
    for sigma, u in zip(unit_annulus.eigenvalues, unit_annulus.eigenfields):
        r = K.matrix @ K.restrict(u) - sigma * Mb.matrix[K.dof_map][:, K.dof_map] @ K.restrict(u)
        scale = abs(K.matrix).sum(axis=1).max() * np.abs(u).max()
        assert np.abs(r).max() < 1e-11 * scale
        assert K.quadratic_form(u) / Mb.quadratic_form(u) == pytest.approx(sigma, rel=1e-10)
        assert Mb.quadratic_form(u) == pytest.approx(1.0, rel=1e-10)
        assert np.all(u[mesh.marked_vertices(Marker.INNER)] == 0)


def test_sign_conventions(unit_annulus):
    mesh = unit_annulus.mesh
    outer = np.sort(mesh.marked_vertices(Marker.OUTER))
    Mb = assemble_boundary_mass(mesh, Marker.OUTER)
    assert Mb.bilinear_form(unit_annulus.eigenfields[0], np.ones(mesh.n_vertices)) > 0
    for u in unit_annulus.eigenfields[1:]:
        vals = u[outer]
        assert vals[np.flatnonzero(np.abs(vals) > 1e-12 * np.abs(vals).max())[0]] > 0


def test_unit_disk_steklov_spectrum():
    mesh = build_polar_mesh(DomainSpec(Disk(1.0)), 128, 32)
    res = solve_steklov(mesh, 4)
    assert res.mode is Mode.STEKLOV
    assert res.eigenvalues == pytest.approx([1, 1, 2, 2], rel=1e-2)
    assert res.multiplicities == [2, 2]


def test_schur_complement_annihilates_constants_without_hole():
    mesh = build_polar_mesh(DomainSpec(Ellipse(1.2, 5 / 6)), 32, 8)
    S = schur_dtn(assemble_stiffness(mesh), mesh)
    assert np.abs(S @ np.ones(len(S))).max() < 1e-12


def test_eigenvalues_scale_inversely_with_the_domain():
    spec = DomainSpec(Ellipse(1.2, 5 / 6), 0.2)
    a = solve_steklov_dirichlet(build_polar_mesh(spec, 48, 12), 4).eigenvalues
    b = solve_steklov_dirichlet(build_polar_mesh(spec.scaled(2.5), 48, 12), 4).eigenvalues
    assert np.allclose(b * 2.5, a, rtol=1e-10)


def test_solves_are_bitwise_deterministic():
    spec = DomainSpec(Ellipse(1.2, 5 / 6), 0.1)
    a = solve_steklov_dirichlet(build_polar_mesh(spec, 48, 12), 5)
    b = solve_steklov_dirichlet(build_polar_mesh(spec, 48, 12), 5)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert np.array_equal(a.eigenfields, b.eigenfields)


def test_dirichlet_solve_requires_a_hole():
    with pytest.raises(HoleRequired):
        solve_steklov_dirichlet(build_polar_mesh(DomainSpec(Disk(1.0)), 16, 4))


def test_friedrich_constant_on_the_unit_disk():
    # smallest eigenvalue of -Lap u = k^2 u with du/dn + u = 0: radial J0(k s), J0(k) = k J1(k)
    k = brentq(lambda k: j0(k) - k * j1(k), 0.5, 2.0)
    C = friedrich_constant(build_polar_mesh(DomainSpec(Disk(1.0)), 128, 32))
    assert C == pytest.approx(1 / k**2, rel=5e-3)
