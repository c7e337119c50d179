import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from errors import ConfigError, NumericalError
from equations import Burgers, Euler1D, ScalarAdvection, conserved_1d, euler_eigen_arrays, euler_jacobian
from mesh import build_offset_grid
from boundary import (Boundary1D, BoundaryFunction, BoundarySpec, Extrapolator, SILWConfig, SideClosure,
                      fill_ghosts_1d, hermite_weights, ilw_from_data, ilw_linear_derivatives, ilw_scalar_derivatives,
                      incoming_characteristics, inflow_case, inflow_case_1d, lagrange_interpolant, lagrange_weights,
                      new_silw_ghosts, original_silw_ghosts, solve_boundary_derivative, solve_boundary_state,
                      weno_extrapolate)


def _left_values(grid, u, d):
    x = grid.coordinates()[:d]
    return u(x), grid.ghost_coordinates('left')


def _right_values(grid, u, d):
    x = grid.coordinates()[::-1][:d]
    return u(x), grid.ghost_coordinates('right')


def test_lagrange_weights_reproduce_polynomial_derivatives(quartic):
    nodes = np.array([0.0, 0.1, 0.2, 0.3, 0.4])
    for k in range(3):
        W = lagrange_weights(nodes, [-0.15, 0.55], k)
        assert_allclose(W @ quartic(nodes), quartic(np.array([-0.15, 0.55]), k), rtol=1e-9, atol=1e-9)


def test_lagrange_interpolant_scalar_evaluation(quadratic):
    p = lagrange_interpolant([0.0, 0.5, 1.0], quadratic(np.array([0.0, 0.5, 1.0])))
    assert p(2.0) == pytest.approx(float(quadratic(2.0)))
    assert p(2.0, 1) == pytest.approx(float(quadratic(2.0, 1)))
    assert p.degree == 2


def test_repeated_nodes_are_rejected():
    with pytest.raises(ValueError):
        lagrange_weights([0.0, 0.0, 1.0], [0.5])


def test_hermite_weights_reproduce_polynomials(quartic):
    k_d = 2
    aux = -0.9 * np.arange(1, 4)
    targets = np.array([0.6, 1.6, 2.6])
    W_D, W_aux = hermite_weights(k_d, aux, targets)
    D = np.array([quartic(0.0, k) for k in range(k_d)])
    assert_allclose(W_D @ D + W_aux @ quartic(aux), quartic(targets), rtol=1e-10)


@pytest.mark.parametrize("treatment", ['new', 'original'])
@pytest.mark.parametrize("side", ['left', 'right'])
def test_closures_are_exact_for_polynomials(quartic, treatment, side):
    d = 5
    grid = build_offset_grid(0.0, 1.0, 40, 0.37, 0.81, 3)
    config = SILWConfig(d, 2, alpha=1.2, treatment=treatment)
    values, ghosts = (_left_values if side == 'left' else _right_values)(grid, quartic, d)
    b = grid.boundary(side)
    derivatives = [float(quartic(b, k)) for k in range(2)]
    fill = new_silw_ghosts if treatment == 'new' else original_silw_ghosts
    assert_allclose(fill(config, values, derivatives, grid, side), quartic(ghosts), rtol=1e-9, atol=1e-12)


def test_closure_with_zero_offset():
    grid = build_offset_grid(0.0, 1.0, 20, 0.0, 0.5, 2)
    config = SILWConfig(3, 2)
    u = lambda x: 2.0 - x + 0.5 * x ** 2
    values = u(grid.coordinates()[:3])
    ghosts = new_silw_ghosts(config, values, [u(0.0), -1.0], grid, 'left')
    assert_allclose(ghosts, u(grid.ghost_coordinates('left')), rtol=1e-12)


def test_outflow_extrapolation_is_exact_for_degree_d_minus_one(quadratic):
    grid = build_offset_grid(0.0, 1.0, 30, 0.2, 0.6, 2)
    closure = SideClosure(grid, 'right', SILWConfig(3, 2))
    values = quadratic(grid.coordinates()[::-1][:3])
    assert_allclose(closure.extrapolate(values)[0], quadratic(grid.ghost_coordinates('right')), rtol=1e-12)


def test_linear_maps_match_ghost_fill(quadratic):
    grid = build_offset_grid(0.0, 1.0, 30, 0.4, 0.6, 2)
    closure = SideClosure(grid, 'left', SILWConfig(3, 2, alpha=0.8))
    values = quadratic(grid.coordinates()[:3])
    D = closure.scale_derivatives([quadratic(0.0), quadratic(0.0, 1)])
    A_D, A_int = closure.linear_maps()
    assert_allclose(A_D @ D[0] + A_int @ values, closure.ghosts_from(D, values)[0], rtol=1e-12)


def test_weno_extrapolation_matches_lagrange_on_smooth_data():
    nodes = 0.1 * np.arange(5)
    values = np.exp(nodes)
    out = weno_extrapolate(values, nodes, -0.05)
    assert out == pytest.approx(math.exp(-0.05), abs=1e-4)


def test_weno_extrapolation_does_not_overshoot_a_jump():
    nodes = 0.01 * np.arange(5)
    values = np.array([1.0, 1.0, 1.0, 100.0, 100.0])
    out = weno_extrapolate(values, nodes, -0.005)
    assert out == pytest.approx(1.0, abs=1e-3)


def test_weno_weights_sum_to_one():
    ext = Extrapolator(-(0.3 + np.arange(5)), 0.01, 'weno')
    omega = ext.weights(np.array([[1.0, 2.0, 0.5, 7.0, 3.0]]))
    assert omega.shape == (1, 5)
    assert omega.sum() == pytest.approx(1.0)


def test_ilw_linear_derivatives():
    g = BoundaryFunction([math.sin, math.cos, lambda t: -math.sin(t)])
    out = ilw_linear_derivatives(2.0, g, 0.3, 2)
    assert_allclose(out, [math.sin(0.3), -math.cos(0.3) / 2, -math.sin(0.3) / 4])


def test_ilw_burgers_second_derivative():
    # u(x, t) = x / (1 + t) solves Burgers; at x = 1: g = 1/(1+t)
    t = 0.5
    data = [1 / (1 + t), -1 / (1 + t) ** 2, 2 / (1 + t) ** 3]
    out = ilw_from_data(Burgers(), data)
    assert_allclose(out, [1 / (1 + t), 1 / (1 + t), 0.0], atol=1e-14)


def test_ilw_scalar_derivatives_from_a_boundary_function():
    g = BoundaryFunction([lambda t: 1 + 0.2 * math.sin(t), lambda t: 0.2 * math.cos(t), lambda t: -0.2 * math.sin(t)])
    assert_allclose(ilw_scalar_derivatives(Burgers(), g, 0.0, 2), [1.0, -0.2, -0.08], atol=1e-14)


def test_sonic_data_is_rejected_by_ilw():
    with pytest.raises(NumericalError):
        ilw_from_data(Burgers(), [0.0, 1.0])


def test_silw_config_validation():
    with pytest.raises(ConfigError):
        SILWConfig(4, 2)
    with pytest.raises(ConfigError):
        SILWConfig(5, 6)
    with pytest.raises(ConfigError):
        SILWConfig(5, 2, treatment='other')
    with pytest.raises(ConfigError):
        SILWConfig(5, 2, alpha=-1.0)


def test_stability_warnings():
    assert SILWConfig(5, 2, alpha=1.0).stability_warnings() == []
    assert len(SILWConfig(5, 2, alpha=0.5).stability_warnings()) == 1
    assert len(SILWConfig(5, 1).stability_warnings()) == 1
    assert len(SILWConfig(5, 2, treatment='original').stability_warnings()) == 1


def test_boundary_spec_validation():
    with pytest.raises(ConfigError):
        BoundarySpec('inflow')
    with pytest.raises(ConfigError):
        BoundarySpec('dirichlet', BoundaryFunction.constant(1.0))


@pytest.mark.parametrize("u_in, count", [(3.0, 3), (0.5, 2), (-0.5, 1), (-3.0, 0)])
def test_inflow_case_1d_counts(u_in, count):
    assert inflow_case_1d(u_in, 1.0)[1] == count


@pytest.mark.parametrize("u_hat, count", [(2.0, 0), (0.5, 1), (-0.5, 3), (-2.0, 4)])
def test_inflow_case_2d_counts(u_hat, count):
    assert inflow_case(u_hat, 1.0)[1] == count


def test_boundary_state_keeps_prescribed_components():
    gamma = 1.4
    U_ext = conserved_1d(1.0, 0.3, 1.0, gamma)
    lam, R, L, c, H = euler_eigen_arrays(U_ext, gamma)
    given = conserved_1d(1.1, 0.35, 1.05, gamma)
    incoming = np.array([True, True, False])
    U0 = solve_boundary_state(L[None], U_ext[None], incoming[None], given[None])[0]
    assert_allclose(U0[:2], given[:2])
    assert L[2] @ U0 == pytest.approx(L[2] @ U_ext)


def test_incoming_set_must_be_a_prefix():
    gamma = 1.4
    U = conserved_1d(1.0, 0.0, 1.0, gamma)
    lam, R, L, c, H = euler_eigen_arrays(U, gamma)
    with pytest.raises(NumericalError):
        solve_boundary_state(L[None], U[None], np.array([[False, True, False]]), U[None])


def _near_sonic_inflow(gamma=1.4):
    U = conserved_1d(1.0, 0.9995, 1.0 / gamma, gamma)
    lam, R, L, c, H = euler_eigen_arrays(U, gamma)
    return U, lam, L, np.atleast_1d(c), euler_jacobian(U, gamma)


def test_near_sonic_characteristic_counts_as_incoming():
    _, lam, _, _, _ = _near_sonic_inflow()
    assert -1e-3 < lam[0] < 0
    assert list(incoming_characteristics(lam)) == [True, False, False]


def test_near_sonic_derivative_with_consistent_data_is_exact():
    U, lam, L, c, A = _near_sonic_inflow()
    U_n = np.array([0.1, -0.2, 0.3])
    incoming = incoming_characteristics(lam)
    out = solve_boundary_derivative(A[None], L[None], U_n[None], incoming[None], np.zeros((1, 3)),
                                    (A @ U_n)[None], lam[None], c)[0]
    assert_allclose(out, U_n, atol=1e-10)


def test_near_sonic_derivative_blends_data_and_extrapolation():
    U, lam, L, c, A = _near_sonic_inflow()
    U_n = np.array([0.1, -0.2, 0.3])
    incoming = incoming_characteristics(lam)
    res = A @ U_n + np.array([0.0, 1.0, 0.0])
    out = solve_boundary_derivative(A[None], L[None], U_n[None], incoming[None], np.zeros((1, 3)),
                                    res[None], lam[None], c)[0]
    square = np.linalg.solve(np.vstack([A[1], L[1], L[2]]), [res[1], L[1] @ U_n, L[2] @ U_n])
    assert abs(L[0] @ square - L[0] @ U_n) > 1e3
    assert abs(L[0] @ out - L[0] @ U_n) < 1.0
    assert abs(A[1] @ out - res[1]) > 1e-3


def test_wall_keeps_gas_at_rest():
    gamma = 1.4
    grid = build_offset_grid(0.0, 1.0, 30, 0.3, 0.6, 3)
    state = conserved_1d(1.0, 0.0, 1.0, gamma)
    field = np.repeat(state[:, None], grid.size, axis=1)
    field[:, :grid.n_ghost] = 0.0
    field[:, -grid.n_ghost:] = 0.0
    specs = {'left': BoundarySpec('wall'), 'right': BoundarySpec('wall')}
    Boundary1D(Euler1D(gamma), grid, SILWConfig(5, 2), specs).fill(field)
    assert_allclose(field, np.repeat(state[:, None], grid.size, axis=1), atol=1e-12)


def test_euler_closure_limits_k_d():
    grid = build_offset_grid(0.0, 1.0, 30, 0.3, 0.6, 3)
    specs = {'left': BoundarySpec('wall'), 'right': BoundarySpec('wall')}
    with pytest.raises(ConfigError):
        Boundary1D(Euler1D(1.4), grid, SILWConfig(5, 3), specs)


def test_wall_needs_a_system():
    grid = build_offset_grid(0.0, 1.0, 30, 0.3, 0.6, 3)
    specs = {'left': BoundarySpec('wall'), 'right': BoundarySpec('outflow')}
    with pytest.raises(ConfigError):
        Boundary1D(ScalarAdvection(), grid, SILWConfig(3, 2), specs)


def test_scalar_inflow_fill_is_exact_for_linear_data():
    # u = 1 + (x - t) moves right; degree one so the d=3 closure is exact
    grid = build_offset_grid(0.0, 1.0, 20, 0.45, 0.55, 2)
    g = BoundaryFunction([lambda t: 1.0 - t, lambda t: -1.0, lambda t: 0.0])
    specs = {'left': BoundarySpec('inflow', g), 'right': BoundarySpec('outflow')}
    x = grid.coordinates_with_ghosts()
    t = 0.2
    field = (1.0 + x - t)[None, :].copy()
    exact = field.copy()
    field[:, :2] = 0.0
    field[:, -2:] = 0.0
    Boundary1D(ScalarAdvection((1.0,)), grid, SILWConfig(3, 2), specs).fill(field, t_n=t)
    assert_allclose(field, exact, rtol=1e-12)


def test_periodic_fill():
    grid = build_offset_grid(0.0, 1.0, 10, 0.5, 0.5, 2)
    specs = {'left': BoundarySpec('periodic'), 'right': BoundarySpec('periodic')}
    field = np.zeros((1, grid.size))
    field[0, grid.interior] = np.arange(11.0)
    Boundary1D(ScalarAdvection(), grid, SILWConfig(3, 2), specs).fill(field)
    assert_allclose(field[0, :2], [9.0, 10.0])
    assert_allclose(field[0, -2:], [0.0, 1.0])


def test_one_shot_fill_matches_the_exact_solution():
    grid = build_offset_grid(0.0, 1.0, 20, 0.3, 0.6, 2)
    g = BoundaryFunction([lambda t: 1.0 - t, lambda t: -1.0, lambda t: 0.0])
    specs = {'left': BoundarySpec('inflow', g), 'right': BoundarySpec('outflow')}
    x = grid.coordinates_with_ghosts()
    field = (1.0 + x - 0.1)[None, :].copy()
    exact = field.copy()
    field[:, :2] = -5.0
    field[:, -2:] = -5.0
    fill_ghosts_1d(ScalarAdvection((1.0,)), field, grid, specs, SILWConfig(3, 2), t_n=0.1)
    assert_allclose(field, exact, rtol=1e-12)
