import math

import numpy as np
import pytest

from steklov_lab.discretize import (
    apply_dirichlet,
    assemble_boundary_mass,
    assemble_domain_mass,
    assemble_full_boundary_mass,
    assemble_stiffness,
    boundary_inner_product,
    element_stiffness,
    h1_distance_to_constant,
    h1_norm_sq,
)
from steklov_lab.errors import NothingToEliminate
from steklov_lab.geometry import Disk, DomainSpec, Ellipse, Marker, area, build_polar_mesh, perimeter


@pytest.fixture(scope="module")
def annulus():
    return build_polar_mesh(DomainSpec(Ellipse(1.2, 5 / 6), 0.2), 24, 6)


def test_reference_element_stiffness():
    K = element_stiffness(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    expected = 0.5 * np.array([[2.0, -1.0, -1.0], [-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0]])
    assert np.allclose(K, expected, atol=1e-15)


def test_stiffness_is_symmetric_and_annihilates_constants(annulus):
    K = assemble_stiffness(annulus).matrix
    assert abs(K - K.T).max() < 1e-14
    assert np.abs(K @ np.ones(annulus.n_vertices)).max() < 1e-12


def test_linear_fields_have_exact_energy(annulus):
    x, y = annulus.vertices.T
    K = assemble_stiffness(annulus)
    A = area(annulus)
    assert K.quadratic_form(2 * x - 3 * y) == pytest.approx(13 * A, rel=1e-12)
    assert K.bilinear_form(x, y) == pytest.approx(0.0, abs=1e-12)


def test_domain_mass_integrates_polynomials_exactly(annulus):
    M = assemble_domain_mass(annulus)
    x, y = annulus.vertices.T
    one = np.ones(annulus.n_vertices)
    assert M.quadratic_form(one) == pytest.approx(area(annulus), rel=1e-12)
    # integral of x over each triangle is area * centroid_x
    tri = annulus.vertices[annulus.triangles]
    signed = annulus.signed_areas()
    assert M.bilinear_form(one, x) == pytest.approx(np.sum(signed * tri[:, :, 0].mean(axis=1)), abs=1e-12)
    # P1 times P1 is exact: int x^2 = sum A/6 (x1^2 + x2^2 + x3^2 + x1x2 + x2x3 + x3x1)
    xs = tri[:, :, 0]
    exact = np.sum(signed / 6 * (np.sum(xs**2, axis=1) + xs[:, 0] * xs[:, 1] + xs[:, 1] * xs[:, 2] + xs[:, 2] * xs[:, 0]))
    assert M.quadratic_form(x) == pytest.approx(exact, rel=1e-12)


def test_boundary_mass_measures_the_polygon(annulus):
    one = np.ones(annulus.n_vertices)
    assert assemble_boundary_mass(annulus, Marker.OUTER).quadratic_form(one) == pytest.approx(perimeter(annulus, Marker.OUTER))
    assert assemble_boundary_mass(annulus, Marker.INNER).quadratic_form(one) == pytest.approx(perimeter(annulus, Marker.INNER))
    full = assemble_full_boundary_mass(annulus).quadratic_form(one)
    assert full == pytest.approx(perimeter(annulus, Marker.OUTER) + perimeter(annulus, Marker.INNER))
    assert boundary_inner_product(annulus, one, one) == pytest.approx(perimeter(annulus, Marker.OUTER))


def test_edge_mass_is_exact_for_linear_traces():
    mesh = build_polar_mesh(DomainSpec(Disk(1.0), 0.5), 8, 2)
    x = mesh.vertices[:, 0]
    got = assemble_boundary_mass(mesh, Marker.OUTER).quadratic_form(x)
    exact = 0.0
    for a, b in mesh.marked_edges(Marker.OUTER):
        L = np.linalg.norm(mesh.vertices[a] - mesh.vertices[b])
        exact += L / 3 * (x[a] ** 2 + x[a] * x[b] + x[b] ** 2)
    assert got == pytest.approx(exact, rel=1e-14)


def test_dirichlet_elimination(annulus):
    K = apply_dirichlet(assemble_stiffness(annulus), annulus)
    inner = set(annulus.marked_vertices(Marker.INNER).tolist())
    assert K.dimension == annulus.n_vertices - len(inner)
    assert not inner & set(K.dof_map.tolist())
    f = np.random.default_rng(0).standard_normal(annulus.n_vertices)
    f[list(inner)] = 0.0
    assert K.quadratic_form(f) == pytest.approx(assemble_stiffness(annulus).quadratic_form(f), rel=1e-12)


def test_dirichlet_without_hole_raises():
    mesh = build_polar_mesh(DomainSpec(Disk(1.0)), 8, 2)
    with pytest.raises(NothingToEliminate):
        apply_dirichlet(assemble_stiffness(mesh), mesh)


def test_h1_distance_to_constant(annulus):
    c = 0.7
    f = np.full(annulus.n_vertices, c)
    assert h1_distance_to_constant(annulus, f, c, math.pi * 0.04) == pytest.approx(c * c * math.pi * 0.04)
    x = annulus.vertices[:, 0]
    assert h1_distance_to_constant(annulus, x, 0.0, 0.0) == pytest.approx(h1_norm_sq(annulus, x))


def test_operator_text_and_entries(annulus, tmp_path):
    K = assemble_stiffness(annulus)
    entries = K.entries()
    assert entries == sorted(entries, key=lambda e: (e[0], e[1]))
    path = tmp_path / "K.txt"
    K.write_text(path)
    lines = path.read_text().splitlines()
    assert lines[1].split()[1:] == [str(v) for v in K.dof_map]
    assert len(lines) == 2 + len(entries)
    i, j, v = lines[2].split()
    assert (int(i), int(j), float(v)) == entries[0]
