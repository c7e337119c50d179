#!/usr/bin/env python3
"""
Registry of the runnable problems.
Closed-form solutions are written once with sympy; their time derivatives,
needed as boundary data by the ILW closures, are derived symbolically and
compiled with lambdify. Burgers-type problems use the characteristic oracle.
"""

import math
import logging
from functools import lru_cache
from typing import Callable, Dict, List, Sequence

import numpy as np
import sympy

from errors import ConfigError
from equations import Euler1D, Euler2D, ScalarAdvection, conserved_1d, conserved_2d
from mesh import Circle, Rectangle, Wedge
from boundary import BoundaryFunction, BoundarySpec
from boundary_2d import BoundaryField2D
from solver import ProblemCase, characteristic_solution, compose_time_derivatives, rankine_hugoniot

logger = logging.getLogger(__name__)

TIME_ORDERS = 3

t_, x_, y_, s_ = sympy.symbols('t x y s', real=True)


def _vector_function(exprs: Sequence, args: Sequence) -> Callable:
    """Compile component expressions into f(*args) -> (n_components, ...) arrays"""
    compiled = sympy.lambdify(args, list(exprs), modules='numpy')

    def evaluate(*values):
        out = compiled(*values)
        shape = np.broadcast(*[np.asarray(v, dtype=float) for v in values]).shape
        return np.array([np.broadcast_to(np.asarray(v, dtype=float), shape) for v in out])
    return evaluate


def _time_derivatives(exprs: Sequence, args: Sequence, orders: int = TIME_ORDERS) -> List[Callable]:
    """[f, f_t, ..., d^orders f / dt^orders] compiled"""
    out = []
    current = list(exprs)
    for _ in range(orders + 1):
        out.append(_vector_function(current, args))
        current = [sympy.diff(e, t_) for e in current]
    return out


def _boundary_at(derivatives: List[Callable], x_b: float, scalar: bool = False) -> BoundaryFunction:
    if scalar:
        return BoundaryFunction([lambda t, f=f: float(f(x_b, t)[0]) for f in derivatives])
    return BoundaryFunction([lambda t, f=f: f(x_b, t) for f in derivatives])


def _euler_1d_exprs(rho, u, p, gamma):
    return [rho, rho * u, p / (gamma - 1) + rho * u ** 2 / 2]


def _euler_2d_exprs(rho, u, v, p, gamma):
    return [rho, rho * u, rho * v, p / (gamma - 1) + rho * (u ** 2 + v ** 2) / 2]


def _derivatives_in(expr, var, orders: int = TIME_ORDERS) -> List[Callable]:
    """f, f', f'', f''' of a one-variable expression, vectorized"""
    return [sympy.lambdify(var, sympy.diff(expr, var, k) + 0 * var, modules='numpy') for k in range(orders + 1)]


def _burgers_state(ic_expr, state_of_mu: Sequence, coordinate: Callable):
    """
    Exact solution and its time derivatives for states that are functions of mu,
    mu solving mu_t + mu mu_s = 0 with mu(s, 0) = ic(s); coordinate maps the
    spatial arguments onto s.
    """
    ic = _derivatives_in(ic_expr, s_)
    states = [_derivatives_in(c, s_) for c in state_of_mu]

    def derivatives(*args):
        *space, t = args
        s = coordinate(*space)
        mu = characteristic_solution(ic, s, t)
        per_component = [compose_time_derivatives(f, mu) for f in states]
        return [np.array([np.broadcast_to(c[k], np.shape(s)) for c in per_component]) for k in range(TIME_ORDERS + 1)]

    return [lambda *args, k=k: derivatives(*args)[k] for k in range(TIME_ORDERS + 1)]


# ---------------------------------------------------------------------------
# 1D problems
# ---------------------------------------------------------------------------

def linear_verify() -> ProblemCase:
    u = [sympy.Rational(1, 4) + sympy.sin(sympy.pi * (x_ - t_)) / 2]
    F = _time_derivatives(u, (x_, t_), 5)
    return ProblemCase(
        name='linear-verify', equation=ScalarAdvection((1.0,)),
        initial=lambda x: F[0](x, 0.0), exact=lambda x, t: F[0](x, t), t_end=30.0,
        domain=(-1.0, 1.0), C_a=0.5, C_b=0.5,
        boundaries={'left': BoundarySpec('inflow', _boundary_at(F, -1.0, scalar=True)),
                    'right': BoundarySpec('outflow')},
        resolutions=(200,),
        description='u_t + u_x = 0 on (-1, 1), g(t) = 0.25 + 0.5 sin(pi t)')


def example1() -> ProblemCase:
    gamma = 1.4
    rho = 1 + sympy.Rational(1, 5) * sympy.sin(x_ - 2 * t_)
    F = _time_derivatives(_euler_1d_exprs(rho, 2, 2, gamma), (x_, t_))
    return ProblemCase(
        name='example1', equation=Euler1D(gamma),
        initial=lambda x: F[0](x, 0.0), exact=lambda x, t: F[0](x, t), t_end=1.0,
        domain=(-math.pi, math.pi), C_a=0.0001, C_b=0.7,
        boundaries={'left': BoundarySpec('inflow', _boundary_at(F, -math.pi)),
                    'right': BoundarySpec('inflow', _boundary_at(F, math.pi))},
        resolutions=(20, 40, 80, 160, 320),
        description='Euler, density wave advected at u = 2')


def example2() -> ProblemCase:
    gamma = 3.0
    rho = s_ / (2 * sympy.sqrt(3))
    state = _euler_1d_exprs(rho, sympy.sqrt(3) * rho, rho ** 3, gamma)
    F = _burgers_state(1 + sympy.Rational(1, 5) * sympy.sin(s_), state, lambda x: x)
    return ProblemCase(
        name='example2', equation=Euler1D(gamma),
        initial=lambda x: F[0](x, 0.0), exact=lambda x, t: F[0](x, t), t_end=3.0,
        domain=(0.0, 2.0 * math.pi), C_a=0.0001, C_b=0.9999,
        boundaries={'left': BoundarySpec('inflow', _boundary_at(F, 0.0)),
                    'right': BoundarySpec('inflow', _boundary_at(F, 2.0 * math.pi))},
        resolutions=(40, 80, 160, 320, 640),
        description='Euler with gamma = 3 reduced to Burgers, sonic at both ends')


def example3() -> ProblemCase:
    gamma = 1.4

    def initial(x):
        x = np.asarray(x, dtype=float)
        p = np.where(x < 0.1, 1000.0, np.where(x < 0.9, 0.01, 100.0))
        return conserved_1d(np.ones_like(x), np.zeros_like(x), p, gamma)

    return ProblemCase(
        name='example3', equation=Euler1D(gamma), initial=initial, t_end=0.038,
        domain=(0.0, 1.0), C_a=0.0001, C_b=0.7,
        boundaries={'left': BoundarySpec('wall'), 'right': BoundarySpec('wall')},
        resolutions=(640,), extrapolation_mode='weno',
        description='interacting blast waves between walls')


def uniform_wall() -> ProblemCase:
    gamma = 1.4
    state = conserved_1d(1.0, 0.0, 1.0, gamma)

    def uniform(x, t=0.0):
        return np.repeat(state[:, None], np.size(x), axis=1)

    return ProblemCase(
        name='uniform-wall', equation=Euler1D(gamma), initial=uniform, exact=uniform, t_end=0.1,
        domain=(0.0, 1.0), C_a=0.3, C_b=0.6,
        boundaries={'left': BoundarySpec('wall'), 'right': BoundarySpec('wall')},
        resolutions=(50,), description='gas at rest between walls')


# ---------------------------------------------------------------------------
# 2D problems
# ---------------------------------------------------------------------------

def _field_2d(F: List[Callable], scalar: bool = False, gradient: Callable = None) -> BoundaryField2D:
    if scalar:
        return BoundaryField2D([lambda x, y, t, f=f: f(x, y, t)[0] for f in F], gradient)
    return BoundaryField2D(F, gradient)


def example4() -> ProblemCase:
    u = [sympy.Rational(1, 4) + sympy.sin(sympy.pi * (x_ + y_ - 2 * t_)) / 2]
    F = _time_derivatives(u, (x_, y_, t_))
    grad = _vector_function([sympy.diff(u[0], x_), sympy.diff(u[0], y_)], (x_, y_, t_))
    return ProblemCase(
        name='example4', dim=2, equation=ScalarAdvection((1.0, 1.0)),
        initial=lambda x, y: F[0](x, y, 0.0), exact=lambda x, y, t: F[0](x, y, t), t_end=1.0,
        geometry=Circle((0.0, 0.0), math.sqrt(0.5)), bounding_box=(-0.8, 0.8, -0.8, 0.8),
        geometry_kind='inflow', boundary_data=_field_2d(F, scalar=True, gradient=grad),
        resolutions=(16, 32, 64, 128), alpha=1.25,
        description='u_t + u_x + u_y = 0 on a disk')


def example5() -> ProblemCase:
    gamma = sympy.Rational(7, 5)
    eps = 5
    xb, yb = x_ - t_, y_ - t_
    r2 = xb ** 2 + yb ** 2
    du = eps / (2 * sympy.pi) * sympy.exp((1 - r2) / 2)
    T = 1 - (gamma - 1) * eps ** 2 / (8 * gamma * sympy.pi ** 2) * sympy.exp(1 - r2)
    rho = T ** (1 / (gamma - 1))
    state = _euler_2d_exprs(rho, 1 - du * yb, 1 + du * xb, rho * T, gamma)
    F = _time_derivatives(state, (x_, y_, t_))
    mean = conserved_2d(1.0, 1.0, 1.0, 1.0, 1.4)
    return ProblemCase(
        name='example5', dim=2, equation=Euler2D(1.4),
        initial=lambda x, y: F[0](x, y, 0.0), exact=lambda x, y, t: F[0](x, y, t), t_end=1.0,
        geometry=Rectangle((-0.5, -0.5), (1.0, 1.0)), bounding_box=(-0.5, 1.0, -0.5, 1.0), grid_origin=(0.0, 0.0),
        geometry_kind='inflow', boundary_data=_field_2d(F), reference_state=mean,
        resolutions=(20, 40, 80), alpha=1.25,
        description='isentropic vortex convected by the mean flow')


def _example6_state():
    gamma = 3.0
    rho = s_ / sympy.sqrt(6)
    vel = sympy.sqrt(sympy.Rational(3, 2)) * rho
    state = _euler_2d_exprs(rho, vel, vel, rho ** 3, gamma)
    return _burgers_state(1 + sympy.Rational(1, 5) * sympy.sin(s_), state, lambda x, y: 0.5 * (x + y))


def example6(disk: bool = False) -> ProblemCase:
    F = _example6_state()
    common = dict(dim=2, equation=Euler2D(3.0), initial=lambda x, y: F[0](x, y, 0.0),
                  exact=lambda x, y, t: F[0](x, y, t), t_end=1.0, geometry_kind='inflow',
                  boundary_data=_field_2d(F), reference_state=conserved_2d(1.0 / math.sqrt(6), 0.5, 0.5, 0.068, 3.0),
                  alpha=1.25)
    if disk:
        R = 1.5 * math.pi
        return ProblemCase(name='example6-disk', geometry=Circle((0.0, 0.0), R),
                           bounding_box=(-1.6 * math.pi, 1.6 * math.pi, -1.6 * math.pi, 1.6 * math.pi),
                           resolutions=(40, 80, 160), description='Burgers-reducible Euler on a disk', **common)
    L = 4.0 * math.pi
    return ProblemCase(name='example6', geometry=Rectangle((0.0, 0.0), (L, L)), bounding_box=(0.0, L, 0.0, L),
                       resolutions=(100, 200, 300, 400), description='Burgers-reducible Euler on a square', **common)


def example7() -> ProblemCase:
    gamma = 1.4
    free = conserved_2d(1.4, 3.0, 0.0, 1.0, gamma)

    def uniform(x, y, t=0.0):
        return np.repeat(free[:, None], np.size(x), axis=1)

    return ProblemCase(
        name='example7', dim=2, equation=Euler2D(gamma), initial=uniform, t_end=3.0,
        geometry=Circle((0.0, 0.0), 1.0, fluid_inside=False), bounding_box=(-4.0, 0.0, 0.0, 6.0),
        sides={'left': 'inflow-state', 'right': 'outflow', 'top': 'outflow', 'bottom': 'reflect'},
        geometry_kind='wall', side_states={'left': uniform}, reference_state=free,
        resolutions=(160,), extrapolation_mode='weno', alpha=1.25,
        description='Mach 3 flow past a cylinder, upper half plane')


def example8() -> ProblemCase:
    gamma = 1.4
    mach = 10.0
    rho2, u2, p2 = rankine_hugoniot(mach, 1.4, 1.0, gamma)
    pre = conserved_2d(1.4, 0.0, 0.0, 1.0, gamma)
    post = conserved_2d(rho2, u2, 0.0, p2, gamma)
    speed = mach * math.sqrt(gamma * 1.0 / 1.4)

    def shocked(x, y, t=0.0):
        x = np.asarray(x, dtype=float)
        behind = x < speed * t
        return np.where(behind[None, :], post[:, None], pre[:, None])

    def behind_shock(x, y, t=0.0):
        return np.repeat(post[:, None], np.size(x), axis=1)

    return ProblemCase(
        name='example8', dim=2, equation=Euler2D(gamma), initial=lambda x, y: shocked(x, y, 0.0), t_end=0.2,
        geometry=Wedge((0.0, 0.0), math.radians(30.0)), bounding_box=(0.0, 3.25, 0.0, 2.0),
        sides={'left': 'inflow-state', 'top': 'inflow-state', 'right': 'outflow', 'bottom': 'geometry'},
        geometry_kind='wall', side_states={'left': behind_shock, 'top': shocked},
        reference_state=pre, resolutions=(1040,), extrapolation_mode='weno', alpha=1.25,
        description='Mach 10 shock meeting a 30 degree wedge')


PROBLEMS: Dict[str, Callable[[], ProblemCase]] = {
    'linear-verify': linear_verify,
    'example1': example1,
    'example2': example2,
    'example3': example3,
    'example4': example4,
    'example5': example5,
    'example6': example6,
    'example6-disk': lambda: example6(disk=True),
    'example7': example7,
    'example8': example8,
    'uniform-wall': uniform_wall,
}


@lru_cache(maxsize=None)
def get_problem(name: str) -> ProblemCase:
    """Build a registered problem; symbolic derivation happens once per name"""
    if name not in PROBLEMS:
        raise ConfigError(f"unknown case {name!r}; expected one of {sorted(PROBLEMS)}")
    logger.debug(f"building problem {name}")
    return PROBLEMS[name]()
