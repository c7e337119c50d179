import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from errors import GeometryError, MeshError
from mesh import (BOX, FAR, GHOST, INTERIOR, Circle, HalfPlane, Rectangle, Wedge,
                  build_offset_grid, classify_points_2d, foot_point_and_normal)


def test_offset_grid_spacing_and_offsets():
    grid = build_offset_grid(-1.0, 1.0, 200, 0.38, 0.5, 3)
    assert grid.dx == pytest.approx(2.0 / 200.88)
    assert grid.x0 == pytest.approx(-1.0 + 0.38 * grid.dx)
    assert grid.xN == pytest.approx(1.0 - 0.5 * grid.dx)
    x = grid.coordinates()
    assert len(x) == 201
    assert_allclose(np.diff(x), grid.dx, rtol=1e-12)
    assert_allclose(x[-1], grid.xN, rtol=1e-12)


def test_ghost_coordinates_are_ordered_outward():
    grid = build_offset_grid(0.0, 1.0, 20, 0.25, 0.75, 3)
    left = grid.ghost_coordinates('left')
    right = grid.ghost_coordinates('right')
    assert_allclose(left, grid.x0 - grid.dx * np.arange(1, 4))
    assert_allclose(right, grid.xN + grid.dx * np.arange(1, 4))
    assert left[0] < grid.boundary('left') <= grid.x0
    assert grid.xN <= grid.boundary('right') < right[0]
    assert grid.size == 21 + 6


def test_zero_offsets_put_nodes_on_the_boundary():
    grid = build_offset_grid(0.0, 1.0, 10, 0.0, 0.0, 2)
    assert grid.x0 == 0.0
    assert grid.xN == pytest.approx(1.0)


@pytest.mark.parametrize("C_a, C_b", [(1.0, 0.5), (-0.1, 0.5), (0.5, 1.2)])
def test_offsets_outside_unit_interval_are_rejected(C_a, C_b):
    with pytest.raises(MeshError):
        build_offset_grid(0.0, 1.0, 20, C_a, C_b, 3)


def test_grid_too_small_for_ghosts():
    with pytest.raises(MeshError):
        build_offset_grid(0.0, 1.0, 4, 0.5, 0.5, 3)


def test_circle_foot_point():
    Pa, n, theta = foot_point_and_normal(Circle((0.0, 0.0), 1.0), (2.0, 0.0))
    assert_allclose(Pa, [1.0, 0.0])
    assert_allclose(n, [1.0, 0.0])
    assert theta == pytest.approx(0.0)


def test_circle_with_fluid_outside_points_inward():
    foot = Circle((0.0, 0.0), 1.0, fluid_inside=False).foot_point((0.0, 0.5))
    assert_allclose(foot.point, [0.0, 1.0])
    assert_allclose(foot.normal, [0.0, -1.0])
    assert foot.distance == pytest.approx(0.5)


def test_circle_center_has_no_foot_point():
    with pytest.raises(GeometryError):
        Circle((0.0, 0.0), 1.0, fluid_inside=False).foot_point((0.0, 0.0))


def test_half_plane_normalizes_its_normal():
    plane = HalfPlane((0.0, 0.0), (0.0, -2.0))
    foot = plane.foot_point((0.3, -0.2))
    assert_allclose(foot.normal, [0.0, -1.0])
    assert_allclose(foot.point, [0.3, 0.0])
    assert foot.distance == pytest.approx(0.2)


def test_rectangle_corner_region_uses_the_corner():
    foot = Rectangle((0.0, 0.0), (1.0, 1.0)).foot_point((1.3, 1.4))
    assert_allclose(foot.point, [1.0, 1.0])
    assert_allclose(foot.normal, [0.6, 0.8])
    assert foot.distance == pytest.approx(0.5)


def test_wedge_ramp_foot_point():
    wedge = Wedge((0.0, 0.0), math.radians(30.0))
    foot = wedge.foot_point((0.1, -0.1))
    assert_allclose(foot.normal, [0.5, -math.sqrt(3) / 2])
    assert foot.distance < math.hypot(0.1, 0.1)
    P = np.array([0.1, -0.1])
    assert_allclose(foot.point + foot.distance * foot.normal, P, atol=1e-14)


def test_wedge_vertex_gets_the_radial_normal():
    wedge = Wedge((0.0, 0.0), math.radians(30.0))
    foot = wedge.foot_point((0.0, -0.1))
    assert_allclose(foot.point, [0.0, 0.0])
    assert_allclose(foot.normal, [0.0, -1.0])


def test_disk_classification():
    h = 0.1
    grid = classify_points_2d(Circle((0.0, 0.0), math.sqrt(0.5)), h, h, (-0.8, 0.8, -0.8, 0.8), 3)
    X, Y = grid.meshgrid()
    r = np.hypot(X, Y)
    assert np.all(r[grid.kind == INTERIOR] < math.sqrt(0.5))
    assert np.all(r[grid.kind == GHOST] >= math.sqrt(0.5))
    assert not np.any(grid.kind == BOX)
    assert np.any(grid.kind == FAR)
    assert grid.n_ghosts > 0
    assert np.all(grid.distances <= 4 * grid.delta)
    gi, gj = grid.ghost_index
    P = np.column_stack([X[gi, gj], Y[gi, gj]])
    assert_allclose(grid.foot_points + grid.distances[:, None] * grid.normals, P, atol=1e-12)
    assert_allclose(np.hypot(grid.foot_points[:, 0], grid.foot_points[:, 1]), math.sqrt(0.5))


def test_ghosts_are_exactly_the_stencil_reads():
    grid = classify_points_2d(Circle((0.0, 0.0), 0.7), 0.1, 0.1, (-0.8, 0.8, -0.8, 0.8), 3)
    interior = grid.kind == INTERIOR
    for i, j in zip(*grid.ghost_index):
        near = interior[max(i - 3, 0):i + 4, j].any() or interior[i, max(j - 3, 0):j + 4].any()
        assert near


def test_box_sides_mark_side_condition_points():
    sides = {'left': 'inflow-state', 'right': 'outflow', 'top': 'outflow', 'bottom': 'reflect'}
    grid = classify_points_2d(Circle((0.0, 0.0), 1.0, fluid_inside=False), 0.1, 0.1,
                              (-4.0, 0.0, 0.0, 6.0), 3, sides)
    assert set(grid.box_ghosts) == {'left', 'right', 'top', 'bottom'}
    assert np.any(grid.kind == BOX)
    assert_allclose(np.hypot(grid.foot_points[:, 0], grid.foot_points[:, 1]), 1.0)


def test_fluid_leaving_the_box_needs_a_side_condition():
    with pytest.raises(MeshError):
        classify_points_2d(Circle((0.0, 0.0), 1.0, fluid_inside=False), 0.1, 0.1, (-4.0, 0.0, 0.0, 6.0), 3)


def test_aspect_ratio_limit():
    with pytest.raises(MeshError):
        classify_points_2d(Circle((0.0, 0.0), 0.5), 0.1, 0.02, (-0.8, 0.8, -0.8, 0.8), 3)


def test_origin_anchored_nodes_sit_at_half_cells():
    h = 1.5 / 20
    grid = classify_points_2d(Rectangle((-0.5, -0.5), (1.0, 1.0)), h, h, (-0.5, 1.0, -0.5, 1.0), 3,
                              origin=(0.0, 0.0))
    k = grid.x / h - 0.5
    assert_allclose(k, np.round(k), atol=1e-9)
    X, Y = grid.meshgrid()
    interior = grid.kind == INTERIOR
    assert np.all(np.abs(X[interior] - 0.25) < 0.75)
    assert X[interior].min() + 0.5 == pytest.approx(h / 6)
    assert 1.0 - X[interior].max() == pytest.approx(5 * h / 6)
