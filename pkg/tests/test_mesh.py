import numpy as np
import pytest

from ltmor.mesh import build_unit_square_mesh, read_field_file, write_field_file


@pytest.mark.parametrize("n, nv, nt, nin", [(2, 9, 8, 1), (4, 25, 32, 9), (86, 87**2, 14792, 85**2)])
def test_counts(n, nv, nt, nin):
    m = build_unit_square_mesh(n)
    assert (m.n_vertices, m.n_triangles, m.n_interior) == (nv, nt, nin)


def test_mesh_size_n86():
    assert build_unit_square_mesh(86).h == pytest.approx(1.6444e-2, rel=1e-4)


@pytest.mark.parametrize("n", [2, 3, 7, 32])
def test_invariants(n):
    m = build_unit_square_mesh(n)
    areas = m.signed_areas()
    assert np.all(areas > 0)
    assert areas.sum() == pytest.approx(1.0, abs=1e-12)
    on_edge = np.isclose(np.abs(m.vertices), 0.5, atol=1e-12).any(axis=1)
    np.testing.assert_array_equal(m.boundary_mask, on_edge)
    inner = m.interior_index[m.interior_index >= 0]
    np.testing.assert_array_equal(np.sort(inner), np.arange(m.n_interior))
    assert np.all(m.interior_index[m.boundary_mask] == -1)


def test_max_edge_length_is_h():
    m = build_unit_square_mesh(10)
    edges, _ = m.edges()
    lengths = np.linalg.norm(m.vertices[edges[:, 0]] - m.vertices[edges[:, 1]], axis=1)
    assert lengths.max() == pytest.approx(m.h, rel=1e-12)


def test_edges_shared_by_at_most_two():
    m = build_unit_square_mesh(6)
    edges, counts = m.edges()
    assert set(np.unique(counts)) == {1, 2}
    # boundary edges belong to exactly one triangle: 4n of them
    assert np.count_nonzero(counts == 1) == 4 * 6
    # Euler: V - E + F = 1 for a disk
    assert m.n_vertices - len(edges) + m.n_triangles == 1


@pytest.mark.parametrize("n", [1, 0, -3, 2.5])
def test_rejects_small_n(n):
    with pytest.raises(ValueError):
        build_unit_square_mesh(n)


def test_immutable():
    m = build_unit_square_mesh(3)
    with pytest.raises(ValueError):
        m.vertices[0, 0] = 1.0


def test_field_file_round_trip(tmp_path):
    m = build_unit_square_mesh(4)
    vals = np.arange(m.n_interior, dtype=float) / 7.0
    path = tmp_path / "f.txt"
    write_field_file(path, m, vals, name="demo")
    assert path.read_text().startswith("# ltmor field demo\nvertices 25\n")
    V, T, u = read_field_file(path)
    np.testing.assert_array_equal(V, m.vertices)
    np.testing.assert_array_equal(T, m.triangles)
    np.testing.assert_array_equal(u[m.interior_vertices], vals)
    assert np.all(u[m.boundary_mask] == 0)


def test_field_file_shape_check(tmp_path):
    m = build_unit_square_mesh(3)
    with pytest.raises(ValueError):
        write_field_file(tmp_path / "x.txt", m, np.zeros(5))
