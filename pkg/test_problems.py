import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from errors import ConfigError
from mesh import INTERIOR, classify_points_2d
from problems import PROBLEMS, get_problem
from solver import burgers_exact, characteristic_solution, compose_time_derivatives, rankine_hugoniot


def test_unknown_case():
    with pytest.raises(ConfigError):
        get_problem('example99')


@pytest.mark.parametrize("name", sorted(PROBLEMS))
def test_every_case_builds(name):
    case = get_problem(name)
    assert case.name == name
    assert case.dim == case.equation.dim
    assert case.t_end > 0


@pytest.mark.parametrize("name", ['linear-verify', 'example1', 'example2'])
def test_exact_solution_starts_from_initial_data(name):
    case = get_problem(name)
    x = np.linspace(case.domain[0], case.domain[1], 11)
    assert_allclose(case.exact(x, 0.0), case.initial(x), atol=1e-12)


def test_linear_boundary_data_and_derivative():
    g = get_problem('linear-verify').boundaries['left'].data
    assert g(0.0) == pytest.approx(0.25)
    assert g(0.0, 1) == pytest.approx(-0.5 * math.pi * math.cos(-math.pi))


def test_example1_boundary_density():
    g = get_problem('example1').boundaries['left'].data
    t = 0.3
    assert g(t)[0] == pytest.approx(1 + 0.2 * math.sin(-math.pi - 2 * t))


def test_two_dimensional_exact_matches_initial():
    case = get_problem('example4')
    X = np.array([0.1, -0.2, 0.3])
    Y = np.array([0.0, 0.25, -0.1])
    assert_allclose(case.exact(X, Y, 0.0), case.initial(X, Y), atol=1e-12)


def test_burgers_oracle_solves_the_implicit_relation():
    x = np.linspace(0.0, 2 * math.pi, 17)
    t = 0.5
    mu = burgers_exact(x, t, lambda s: 1 + 0.2 * np.sin(s), lambda s: 0.2 * np.cos(s))
    assert_allclose(mu, 1 + 0.2 * np.sin(x - mu * t), atol=1e-12)


def test_characteristic_time_derivatives():
    ic = (lambda s: 1 + 0.2 * np.sin(s), lambda s: 0.2 * np.cos(s),
          lambda s: -0.2 * np.sin(s), lambda s: -0.2 * np.cos(s))
    x = np.array([0.3, 1.7, 4.0])
    t, eps = 0.8, 1e-5
    mu, mu_t, _, _ = characteristic_solution(ic, x, t)
    ahead = characteristic_solution(ic, x, t + eps)[0]
    behind = characteristic_solution(ic, x, t - eps)[0]
    assert_allclose(mu_t, (ahead - behind) / (2 * eps), atol=1e-7)


def test_compose_time_derivatives_chain_rule():
    f = (np.exp, np.exp, np.exp, np.exp)
    out = compose_time_derivatives(f, (0.0, 2.0, 0.0, 0.0))
    assert out == pytest.approx([1.0, 2.0, 4.0, 8.0])


def test_rankine_hugoniot_strong_shock():
    rho2, u2, p2 = rankine_hugoniot(10.0, 1.4, 1.0, 1.4)
    assert rho2 == pytest.approx(1.4 * 240 / 42)
    assert p2 == pytest.approx(116.5)
    assert u2 == pytest.approx(10.0 * (1 - 42 / 240))


def test_rankine_hugoniot_needs_supersonic_shock():
    with pytest.raises(ValueError):
        rankine_hugoniot(0.9, 1.0, 1.0, 1.4)


def _wall_offsets(case, N):
    h = case.spacing(N)
    grid = classify_points_2d(case.geometry, h, h, case.bounding_box, 3, case.sides, origin=case.grid_origin)
    X, _ = grid.meshgrid()
    inside = X[grid.kind == INTERIOR]
    return (inside.min() + 0.5) / h, (1.0 - inside.max()) / h


def test_vortex_walls_do_not_sit_on_half_cells():
    case = get_problem('example5')
    left, right = _wall_offsets(case, 20)
    assert left == pytest.approx(1 / 6)
    assert right == pytest.approx(5 / 6)
    assert _wall_offsets(case, 40)[0] == pytest.approx(5 / 6)
