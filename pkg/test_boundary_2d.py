import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from errors import ConfigError
from equations import Euler2D, ScalarAdvection, conserved_2d
from mesh import INTERIOR, Circle, HalfPlane, classify_points_2d
from boundary import SILWConfig
from boundary_2d import (Boundary2D, BoundaryField2D, LeastSquaresStencils, design_rows, fill_ghosts_2d,
                         monomial_exponents)


def _disk(h=0.1, n_ghost=2):
    return classify_points_2d(Circle((0.0, 0.0), math.sqrt(0.5)), h, h, (-0.8, 0.8, -0.8, 0.8), n_ghost)


def test_monomials_nest_by_degree():
    exps = monomial_exponents(2)
    assert exps == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]


def test_design_row_derivatives():
    rows = design_rows(2.0, 3.0, monomial_exponents(2), 1, 0)
    assert_allclose(rows[0], [0.0, 1.0, 0.0, 4.0, 3.0, 0.0])


def test_least_squares_is_exact_for_quadratics():
    grid = _disk()
    config = SILWConfig(3, 2)
    points = np.stack([grid.foot_points - 0.05 * grid.normals], axis=1)
    stencils = LeastSquaresStencils(grid, config, points)
    X, Y = grid.meshgrid()
    u = 0.4 + X - 2 * Y + 0.5 * X * Y - Y ** 2
    field = np.where(grid.kind == INTERIOR, u, 0.0)[None]
    out = stencils.evaluate(field)
    Pa = grid.foot_points
    px, py = Pa[:, 0], Pa[:, 1]
    assert_allclose(out[0, :, 0], 0.4 + px - 2 * py + 0.5 * px * py - py ** 2, atol=1e-10)
    assert_allclose(out[0, :, 1], 1 + 0.5 * py, atol=1e-9)
    assert_allclose(out[0, :, 2], -2 + 0.5 * px - 2 * py, atol=1e-9)
    ex, ey = points[:, 0, 0], points[:, 0, 1]
    assert_allclose(out[0, :, 3], 0.4 + ex - 2 * ey + 0.5 * ex * ey - ey ** 2, atol=1e-10)


def test_scalar_disk_ghosts_are_exact_for_linear_data():
    # u = 1 + 0.3 (x - t) + 0.2 (y - t) solves u_t + u_x + u_y = 0
    grid = _disk()
    t = 0.3

    def exact(x, y, t):
        return 1 + 0.3 * (np.asarray(x) - t) + 0.2 * (np.asarray(y) - t)

    data = BoundaryField2D([exact, lambda x, y, t: np.full(np.shape(x), -0.5),
                            lambda x, y, t: np.zeros(np.shape(x))])
    X, Y = grid.meshgrid()
    field = np.where(grid.kind == INTERIOR, exact(X, Y, t), 0.0)[None]
    Boundary2D(ScalarAdvection((1.0, 1.0)), grid, SILWConfig(3, 2, alpha=1.25), 'inflow', data).fill(field, t)
    gi, gj = grid.ghost_index
    assert_allclose(field[0, gi, gj], exact(X[gi, gj], Y[gi, gj], t), atol=1e-9)


def test_data_gradient_is_used_when_given():
    grid = _disk()
    t = 0.0

    def exact(x, y, t):
        return 1 + 0.3 * (np.asarray(x) - t) + 0.2 * (np.asarray(y) - t)

    gradient = lambda x, y, t: np.stack([np.full(np.shape(x), 0.3), np.full(np.shape(x), 0.2)])
    data = BoundaryField2D([exact, lambda x, y, t: np.full(np.shape(x), -0.5),
                            lambda x, y, t: np.zeros(np.shape(x))], gradient)
    X, Y = grid.meshgrid()
    field = np.where(grid.kind == INTERIOR, exact(X, Y, t), 0.0)[None]
    fill_ghosts_2d(ScalarAdvection((1.0, 1.0)), field, grid, SILWConfig(3, 2, alpha=1.25), 'inflow', data)
    gi, gj = grid.ghost_index
    assert_allclose(field[0, gi, gj], exact(X[gi, gj], Y[gi, gj], t), atol=1e-9)


@pytest.mark.parametrize("treatment", ['new', 'original'])
def test_wall_keeps_gas_at_rest(treatment):
    grid = classify_points_2d(Circle((0.0, 0.0), 1.0), 0.1, 0.1, (-1.0, 1.0, -1.0, 1.0), 3)
    state = conserved_2d(1.0, 0.0, 0.0, 1.0, 1.4)
    field = np.zeros((4,) + grid.shape)
    field[:, grid.interior_mask] = state[:, None]
    Boundary2D(Euler2D(1.4), grid, SILWConfig(5, 2, alpha=1.25, treatment=treatment), 'wall').fill(field)
    gi, gj = grid.ghost_index
    assert_allclose(field[:, gi, gj], np.repeat(state[:, None], len(gi), axis=1), atol=1e-10)


def test_box_side_conditions():
    sides = {'left': 'inflow-state', 'right': 'outflow', 'bottom': 'reflect', 'top': 'outflow'}
    grid = classify_points_2d(HalfPlane((0.0, -5.0), (0.0, -1.0)), 0.1, 0.1, (0.0, 1.0, 0.0, 1.0), 3, sides)
    assert grid.n_ghosts == 0
    X, Y = grid.meshgrid()
    u = 1 + 2 * X + 3 * Y
    field = np.where(grid.interior_mask, u, 0.0)[None]
    states = {'left': lambda x, y, t: (1 + 2 * x + 3 * y)[None]}
    Boundary2D(ScalarAdvection((1.0, 1.0)), grid, SILWConfig(3, 2), 'inflow', None, states).fill(field)

    g = grid.n_ghost
    inner = slice(g, g + grid.ny)
    assert_allclose(field[0, :g, inner], u[:g, inner])
    assert_allclose(field[0, -g:, inner], u[-g:, inner], atol=1e-12)
    assert_allclose(field[0, g:g + grid.nx, -g:], u[g:g + grid.nx, -g:], atol=1e-12)
    for j in range(g):
        assert_allclose(field[0, g:g + grid.nx, j], field[0, g:g + grid.nx, 2 * g - 1 - j])


def test_inflow_state_side_needs_a_state():
    sides = {'left': 'inflow-state', 'right': 'outflow', 'bottom': 'outflow', 'top': 'outflow'}
    grid = classify_points_2d(HalfPlane((0.0, -5.0), (0.0, -1.0)), 0.1, 0.1, (0.0, 1.0, 0.0, 1.0), 3, sides)
    with pytest.raises(ConfigError):
        Boundary2D(ScalarAdvection((1.0, 1.0)), grid, SILWConfig(3, 2), 'inflow')


def test_two_dimensional_closures_limit_k_d():
    with pytest.raises(ConfigError):
        Boundary2D(Euler2D(1.4), _disk(), SILWConfig(5, 3), 'wall')


def test_wall_needs_the_euler_equations():
    with pytest.raises(ConfigError):
        Boundary2D(ScalarAdvection((1.0, 1.0)), _disk(), SILWConfig(3, 2), 'wall')
