import math

import numpy as np
import pytest

from platewave.config import default_config
from platewave.errors import InvalidArgumentError
from platewave.mesh import PlateGeometry
from platewave.sim import interpolate_nodal
from platewave.study import (
    REFERENCE_T_TILDE,
    REFERENCE_WINDOW,
    DiscreteField,
    convergence_study,
    field_at_time,
    fit_order,
    l2_error_between,
    window_quadrature,
)

from conftest import mesh_and_nodes

# Table 2 of the reference study: row j compares meshes ny = j and j + 1
TABLE2_H = math.sqrt(2) * 1e-3 / np.arange(2, 15)
TABLE2_LINEAR = [2.2768e-7, 1.2991e-7, 6.7139e-8, 3.6441e-8, 2.1537e-8, 1.3660e-8, 9.1647e-9,
                 6.4316e-9, 4.6813e-9, 3.5115e-9, 2.7008e-9, 2.1213e-9, 1.6966e-9]
TABLE2_QUAD = [7.8126e-8, 8.9191e-9, 2.0703e-9, 7.3263e-10, 3.3669e-10, 1.8367e-10,
               1.1266e-10, 7.5068e-11, 5.3120e-11, 3.9344e-11, 3.0197e-11, 2.3837e-11,
               1.9257e-11]


def _field(ny, k, fx, fy):
    mesh, nodes = mesh_and_nodes(ny, k)
    return DiscreteField(mesh, nodes, interpolate_nodal(nodes, fx, fy))


@pytest.mark.parametrize("window", [REFERENCE_WINDOW, (0.00123, 0.0311)])
def test_window_quadrature_integrates_polynomials(window):
    mesh, _ = mesh_and_nodes(3, 1)
    pts, w = window_quadrature(mesh, window, 4)
    a, b = window
    assert w.sum() == pytest.approx((b - a) * 1e-3, rel=1e-12)
    exact = (b**3 - a**3) / 3 * (1e-3) ** 3 / 3
    assert np.sum(w * pts[:, 0] ** 2 * pts[:, 1] ** 2) == pytest.approx(exact, rel=1e-11)


def test_identical_fields_have_zero_error():
    f = _field(3, 2, lambda x, y: np.sin(300 * x), lambda x, y: y)
    assert l2_error_between(f, f, REFERENCE_WINDOW, 1e-3) == 0.0


def test_constant_offset():
    c = 2.5e-6
    a = _field(2, 1, lambda x, y: 0 * x, lambda x, y: 0 * x)
    b = _field(3, 2, lambda x, y: 0 * x + c, lambda x, y: 0 * x)
    area = (REFERENCE_WINDOW[1] - REFERENCE_WINDOW[0]) * 1e-3
    assert l2_error_between(a, b, REFERENCE_WINDOW, 1e-3) == pytest.approx(c * math.sqrt(area),
                                                                       rel=1e-12)


def test_incompatible_plates_rejected():
    a = _field(2, 1, lambda x, y: 0 * x, lambda x, y: 0 * x)
    from platewave.mesh import build_structured_mesh, enumerate_nodes

    m = build_structured_mesh(PlateGeometry(5e-2, 2e-3), 2)
    n = enumerate_nodes(m, 1)
    b = DiscreteField(m, n, np.zeros(n.n_dofs))
    with pytest.raises(InvalidArgumentError):
        l2_error_between(a, b, REFERENCE_WINDOW, 1e-3)
    with pytest.raises(InvalidArgumentError):
        l2_error_between(a, a, (0.01, 0.01), 1e-3)


def test_fit_order_on_reference_table():
    assert fit_order(TABLE2_H, TABLE2_LINEAR) == pytest.approx(2.5, abs=0.2)
    assert fit_order(TABLE2_H, TABLE2_QUAD) == pytest.approx(4.3, abs=0.2)
    h = np.array([1.0, 0.5, 0.25])
    assert fit_order(h, 3 * h**2) == pytest.approx(2.0, rel=1e-12)


def test_study_rows_and_columns():
    cfg = default_config()
    study = convergence_study(cfg, [2, 3, 4], degree=1)
    assert [r.ny for r in study.rows] == [3, 4]
    for r in study.rows:
        assert r.dof == 100 * r.ny**2 + 102 * r.ny + 2
        assert r.h == pytest.approx(math.sqrt(2) * 1e-3 / r.ny, rel=1e-15)
    assert study.rows[0].e_t > study.rows[1].e_t > 0
    with pytest.raises(InvalidArgumentError):
        convergence_study(cfg, [2, 2, 3])
    with pytest.raises(InvalidArgumentError):
        convergence_study(cfg, [2, 3])


@pytest.mark.parametrize("k,table", [(1, TABLE2_LINEAR), (2, TABLE2_QUAD)])
def test_reference_table_first_two_rows(k, table):
    cfg = default_config()
    f = [field_at_time(cfg, ny, k, REFERENCE_T_TILDE) for ny in (1, 2, 3)]
    e12 = l2_error_between(f[0], f[1], REFERENCE_WINDOW, 1e-3)
    e23 = l2_error_between(f[1], f[2], REFERENCE_WINDOW, 1e-3)
    assert e12 == pytest.approx(table[0], rel=0.1)
    assert e23 == pytest.approx(table[1], rel=0.1)
