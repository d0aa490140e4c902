import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from platewave.errors import InvalidArgumentError, OutOfDomainError
from platewave.mesh import (
    DELTA1,
    DELTA2,
    DELTA3,
    DELTA4,
    INTERIOR,
    PlateGeometry,
    boundary_tag_of,
    build_structured_mesh,
    enumerate_nodes,
)

from conftest import mesh_and_nodes


def test_counts_follow_structured_layout():
    mesh, _ = mesh_and_nodes(3, 1)
    assert (mesh.nx, mesh.ny) == (150, 3)
    assert mesh.n_vertices == 151 * 4
    assert mesh.n_triangles == 2 * 150 * 3


@pytest.mark.parametrize("ny", range(1, 15))
def test_dof_closed_forms(ny):
    mesh = build_structured_mesh(PlateGeometry(), ny)
    assert enumerate_nodes(mesh, 1).n_dofs == 100 * ny**2 + 102 * ny + 2
    assert enumerate_nodes(mesh, 2).n_dofs == 400 * ny**2 + 204 * ny + 2


def test_areas_tile_the_plate_and_are_ccw(geom):
    mesh, _ = mesh_and_nodes(4, 1)
    a = mesh.areas()
    assert np.all(a > 0)
    assert math.isclose(a.sum(), geom.Lx * geom.Ly, rel_tol=1e-12)


def test_mesh_size_and_angles():
    mesh, _ = mesh_and_nodes(4, 1)
    assert mesh.h == pytest.approx(math.sqrt(2) * 1e-3 / 4, rel=1e-15)
    assert mesh.min_angle() == pytest.approx(45.0)


def test_boundary_tags_and_corners(geom):
    assert boundary_tag_of((0.0, 0.0), geom) == DELTA4
    assert boundary_tag_of((0.0, geom.Ly), geom) == DELTA4
    assert boundary_tag_of((geom.Lx, 0.0), geom) == DELTA2
    assert boundary_tag_of((0.01, 0.0), geom) == DELTA1
    assert boundary_tag_of((0.01, geom.Ly), geom) == DELTA3
    assert boundary_tag_of((0.01, 0.5e-3), geom) is None


def test_boundary_edges_cover_perimeter(geom):
    mesh, _ = mesh_and_nodes(3, 1)
    V = mesh.vertices
    E = mesh.edges[mesh.boundary_edges]
    lengths = np.linalg.norm(V[E[:, 0]] - V[E[:, 1]], axis=1)
    assert lengths.sum() == pytest.approx(2 * (geom.Lx + geom.Ly), rel=1e-12)
    for tag, expect in [(DELTA1, geom.Lx), (DELTA3, geom.Lx), (DELTA2, geom.Ly), (DELTA4, geom.Ly)]:
        assert lengths[mesh.boundary_edge_tags == tag].sum() == pytest.approx(expect, rel=1e-12)


def test_every_interior_edge_shared_twice():
    mesh, _ = mesh_and_nodes(2, 1)
    counts = np.bincount(mesh.triangle_edges.ravel(), minlength=len(mesh.edges))
    expect = np.full(len(mesh.edges), 2)
    expect[mesh.boundary_edges] = 1
    assert np.array_equal(counts, expect)


def test_vertex_tags():
    mesh, _ = mesh_and_nodes(2, 1)
    assert np.sum(mesh.vertex_tags == DELTA4) == mesh.ny + 1
    assert np.sum(mesh.vertex_tags == INTERIOR) == (mesh.nx - 1) * (mesh.ny - 1)


def test_dirichlet_nodes_on_driven_end():
    for k in (1, 2):
        mesh, nodes = mesh_and_nodes(3, k)
        xs = nodes.nodes[nodes.dirichlet_nodes, 0]
        assert np.all(xs == 0.0)
        assert len(nodes.dirichlet_nodes) == k * mesh.ny + 1
        assert np.array_equal(nodes.dirichlet_dofs[0::2], 2 * nodes.dirichlet_nodes)


def test_p2_midpoints_follow_vertices():
    mesh, nodes = mesh_and_nodes(2, 2)
    assert np.array_equal(nodes.nodes[: mesh.n_vertices], mesh.vertices)
    en = nodes.element_nodes
    V = nodes.nodes
    for a, b, m in [(0, 1, 3), (1, 2, 4), (2, 0, 5)]:
        assert np.allclose(V[en[:, m]], 0.5 * (V[en[:, a]] + V[en[:, b]]), atol=1e-18)


def test_invalid_inputs():
    with pytest.raises(InvalidArgumentError):
        PlateGeometry(Lx=-1.0)
    with pytest.raises(InvalidArgumentError):
        build_structured_mesh(PlateGeometry(), 0)
    mesh, _ = mesh_and_nodes(2, 1)
    with pytest.raises(InvalidArgumentError):
        enumerate_nodes(mesh, 3)


def test_locate_rejects_outside_points():
    mesh, _ = mesh_and_nodes(2, 1)
    with pytest.raises(OutOfDomainError):
        mesh.locate([[0.06, 0.0]])


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 5e-2), st.floats(0.0, 1e-3))
def test_locate_reconstructs_point(x, y):
    mesh, _ = mesh_and_nodes(2, 1)
    tri, bary = mesh.locate([[x, y]])
    assert bary.min() >= -1e-12
    assert bary.sum() == pytest.approx(1.0, abs=1e-12)
    back = bary[0] @ mesh.vertices[mesh.triangles[tri[0]]]
    assert np.allclose(back, [x, y], atol=1e-15)


def test_write_text_format(tmp_path):
    mesh, _ = mesh_and_nodes(1, 1)
    path = tmp_path / "m.txt"
    mesh.write_text(path)
    lines = path.read_text().splitlines()
    nv, nt = map(int, lines[0].split())
    assert (nv, nt) == (mesh.n_vertices, mesh.n_triangles)
    assert len(lines) == 1 + nv + nt
    x, y, tag = lines[1].split()
    assert int(tag) == DELTA4
    assert list(map(int, lines[1 + nv].split())) == list(mesh.triangles[0])
