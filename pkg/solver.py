#!/usr/bin/env python3
"""
Problem driver: builds the grid and boundary closure for a ProblemCase,
integrates to t_end and measures errors against the exact solution.
Also holds the characteristic-solution oracle used for Burgers-type data.
"""

import math
import time
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import optimize

from errors import ConfigError, NumericalError
from mesh import FAR, build_offset_grid, classify_points_2d, debug_sentinels
from reconstruction import lax_friedrichs_speeds, residual_field, scheme_ghost_width, scheme_order
from boundary import Boundary1D, SILWConfig
from boundary_2d import Boundary2D
from timeint import StepControl, compute_dt, integrate

logger = logging.getLogger(__name__)

NEWTON_TOLERANCE = 1e-13
NEWTON_MAXITER = 100
FLOAT_FORMAT = '%.12g'


@dataclass
class ProblemCase:
    """
    A runnable problem. 1D cases give domain, offsets and per-side BoundarySpec;
    2D cases give geometry, bounding box, side conditions and boundary data.
    initial(x) / initial(X, Y) and exact(x, t) / exact(X, Y, t) return (n_vars, ...) arrays.
    """
    name: str
    equation: object
    initial: Callable
    t_end: float
    dim: int = 1
    exact: Optional[Callable] = None
    domain: Tuple[float, float] = (0.0, 1.0)
    C_a: float = 0.5
    C_b: float = 0.5
    boundaries: Dict = field(default_factory=dict)
    geometry: object = None
    bounding_box: Tuple[float, float, float, float] = None
    grid_origin: Optional[Tuple[float, float]] = None
    sides: Dict[str, str] = field(default_factory=dict)
    geometry_kind: str = 'wall'
    boundary_data: object = None
    side_states: Dict[str, Callable] = field(default_factory=dict)
    reference_state: Optional[Sequence[float]] = None
    resolutions: Sequence = ()
    error_component: int = 0
    extrapolation_mode: str = 'lagrange'
    alpha: float = 1.0
    description: str = ''

    def spacing(self, resolution) -> float:
        """Mesh width for a resolution: N points in 1D, cells across the box width in 2D"""
        if self.dim == 1:
            return (self.domain[1] - self.domain[0]) / (self.C_a + self.C_b + resolution)
        return (self.bounding_box[1] - self.bounding_box[0]) / resolution


@dataclass
class RunResult:
    case: str
    resolution: object
    field: np.ndarray
    grid: object
    t: float
    steps: int
    h: float
    L1: Optional[float] = None
    Linf: Optional[float] = None
    wall_time: float = 0.0
    error_history: List[Tuple[float, float, float]] = field(default_factory=list)

    def interior_values(self) -> np.ndarray:
        if getattr(self.grid, 'kind', None) is None:
            return self.field[:, self.grid.interior]
        return self.field[:, self.grid.interior_mask]


def error_norms(numeric: np.ndarray, exact: np.ndarray, mask: Optional[np.ndarray] = None) -> Tuple[float, float]:
    """(mean, max) absolute error over the masked points"""
    numeric = np.asarray(numeric, dtype=float)
    exact = np.asarray(exact, dtype=float)
    if numeric.shape != exact.shape:
        raise ValueError(f"shape mismatch {numeric.shape} vs {exact.shape}")
    err = np.abs(numeric - exact)
    if mask is not None:
        err = err[mask]
    if err.size == 0:
        raise ValueError("no points to measure")
    return float(err.mean()), float(err.max())


# ---------------------------------------------------------------------------
# Characteristic oracle for Burgers-type data
# ---------------------------------------------------------------------------

def burgers_exact(x, t: float, ic: Callable, ic_prime: Callable) -> np.ndarray:
    """mu = ic(x - mu t) by Newton's method started from ic(x)"""
    x = np.asarray(x, dtype=float)
    if t == 0:
        return np.asarray(ic(x), dtype=float)

    def residual(mu):
        return mu - ic(x - mu * t)

    def slope(mu):
        return 1.0 + t * ic_prime(x - mu * t)

    mu0 = np.asarray(ic(x), dtype=float)
    if np.any(slope(mu0) <= 0):
        raise NumericalError(f"characteristics have crossed by t={t}")
    try:
        mu = optimize.newton(residual, mu0, fprime=slope, tol=1e-15, maxiter=NEWTON_MAXITER)
    except RuntimeError as e:
        raise NumericalError(f"Newton iteration did not converge: {e}") from e
    mu = np.asarray(mu, dtype=float)
    worst = float(np.max(np.abs(residual(mu)))) if mu.size else 0.0
    if worst > NEWTON_TOLERANCE * max(1.0, float(np.max(np.abs(mu)))):
        raise NumericalError(f"characteristic residual {worst:.3g} after Newton")
    return mu


def characteristic_solution(ic: Sequence[Callable], x, t: float) -> Tuple[np.ndarray, ...]:
    """
    mu and its time derivatives mu_t, mu_tt, mu_ttt at fixed x, for mu = phi(x - mu t).
    ic = (phi, phi', phi'', phi''').
    """
    phi, p1, p2, p3 = ic
    mu = burgers_exact(x, t, phi, p1)
    xi = np.asarray(x, dtype=float) - mu * t
    f1, f2, f3 = p1(xi), p2(xi), p3(xi)
    D = 1.0 + t * f1
    xi_t = -mu / D
    mu_t = -mu * f1 / D
    mu_tt = (f2 * xi_t ** 2 - 2.0 * f1 * mu_t) / D
    xi_tt = -2.0 * mu_t - t * mu_tt
    mu_ttt = (f3 * xi_t ** 3 + 3.0 * f2 * xi_t * xi_tt - 3.0 * f1 * mu_tt) / D
    return mu, mu_t, mu_tt, mu_ttt


def compose_time_derivatives(f: Sequence[Callable], r: Sequence[np.ndarray]) -> List[np.ndarray]:
    """
    Time derivatives of f(r(t)) up to order 3 from f, f', f'', f''' and r, r_t, r_tt, r_ttt
    """
    r0, r1, r2, r3 = r
    out = [f[0](r0)]
    out.append(f[1](r0) * r1)
    out.append(f[2](r0) * r1 ** 2 + f[1](r0) * r2)
    out.append(f[3](r0) * r1 ** 3 + 3.0 * f[2](r0) * r1 * r2 + f[1](r0) * r3)
    return out


def rankine_hugoniot(mach: float, rho1: float, p1: float, gamma: float) -> Tuple[float, float, float]:
    """Post-shock (rho, u, p) behind a shock moving at Mach `mach` into gas at rest"""
    if mach <= 1:
        raise ValueError(f"shock Mach number must exceed 1, got {mach}")
    c1 = math.sqrt(gamma * p1 / rho1)
    m2 = mach * mach
    rho2 = rho1 * (gamma + 1.0) * m2 / ((gamma - 1.0) * m2 + 2.0)
    p2 = p1 * (2.0 * gamma * m2 - (gamma - 1.0)) / (gamma + 1.0)
    u2 = mach * c1 * (1.0 - rho1 / rho2)
    return rho2, u2, p2


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------

def _setup_1d(case: ProblemCase, scheme: str, silw: SILWConfig, N: int):
    grid = build_offset_grid(case.domain[0], case.domain[1], N, case.C_a, case.C_b, scheme_ghost_width(scheme))
    eq = case.equation
    u = np.zeros((eq.n_vars, grid.size))
    x = grid.coordinates()
    u[:, grid.interior] = np.asarray(case.initial(x), dtype=float).reshape(eq.n_vars, -1)
    boundary = Boundary1D(eq, grid, silw, case.boundaries)

    frozen = {}

    def residual(v):
        out = np.zeros_like(v)
        out[:, grid.interior] = residual_field(v, eq, scheme, grid, lf_speeds=frozen.get('speeds'))
        return out

    def dt_fn(control):
        def dt(v):
            frozen['speeds'] = lax_friedrichs_speeds(v, eq, grid)
            return compute_dt(control, frozen['speeds'][0], grid.dx)
        return dt

    def exact(t):
        return np.asarray(case.exact(x, t), dtype=float).reshape(eq.n_vars, -1)

    return grid, u, boundary, residual, dt_fn, exact, grid.interior, grid.dx


def _setup_2d(case: ProblemCase, scheme: str, silw: SILWConfig, resolution: int):
    h = case.spacing(resolution)
    grid = classify_points_2d(case.geometry, h, h, case.bounding_box, scheme_ghost_width(scheme), case.sides,
                              origin=case.grid_origin)
    eq = case.equation
    mask = grid.interior_mask
    X, Y = grid.meshgrid()
    u = np.zeros((eq.n_vars,) + grid.shape)
    if case.reference_state is not None:
        u[:] = np.asarray(case.reference_state, dtype=float).reshape(-1, 1, 1)
    if debug_sentinels():
        u[:, grid.kind == FAR] = np.nan
    u[:, mask] = np.asarray(case.initial(X[mask], Y[mask]), dtype=float).reshape(eq.n_vars, -1)
    boundary = Boundary2D(eq, grid, silw, case.geometry_kind, case.boundary_data, case.side_states)

    frozen = {}

    def residual(v):
        return residual_field(v, eq, scheme, grid, active=mask, lf_speeds=frozen.get('speeds'))

    def dt_fn(control):
        def dt(v):
            frozen['speeds'] = lax_friedrichs_speeds(v, eq, grid, mask)
            a_x, a_y = frozen['speeds']
            return compute_dt(control, a_x, grid.dx, a_y, grid.dy)
        return dt

    def exact(t):
        return np.asarray(case.exact(X[mask], Y[mask], t), dtype=float).reshape(eq.n_vars, -1)

    return grid, u, boundary, residual, dt_fn, exact, mask, h


def run_case(case: ProblemCase, scheme: str, silw: SILWConfig, resolution, step: Optional[StepControl] = None,
             t_end: Optional[float] = None, track_error: bool = False) -> RunResult:
    """Integrate a case to t_end; errors are measured on the case's error component"""
    if scheme_order(scheme) != silw.d:
        raise ConfigError(f"scheme {scheme} is order {scheme_order(scheme)} but the closure is order {silw.d}")
    if case.dim != case.equation.dim:
        raise ConfigError(f"{case.name}: {case.dim}D case with a {case.equation.dim}D equation")
    silw.stability_warnings()

    t_end = case.t_end if t_end is None else t_end
    step = step or StepControl(order=silw.d)
    setup = _setup_1d if case.dim == 1 else _setup_2d
    grid, u, boundary, residual, dt_fn, exact, mask, h = setup(case, scheme, silw, resolution)
    eq = case.equation
    comp = case.error_component
    logger.info(f"{case.name}: {scheme} k_d={silw.k_d} alpha={silw.alpha} {silw.treatment}, "
                f"resolution {resolution} (h={h:.4g}), t_end={t_end}")

    history = []

    def monitor(n, t, v):
        if track_error and case.exact is not None:
            L1, Linf = error_norms(v[comp][mask], exact(t)[comp])
            history.append((t, L1, Linf))

    def check(v, n):
        if eq.is_system:
            eq.check_positivity(v[:, mask], step=n)

    def magnitude(v):
        return float(np.max(np.abs(v[:, mask])))

    if track_error and case.exact is not None:
        monitor(0, 0.0, u)
    started = time.time()
    u, t, steps = integrate(u, residual, boundary.fill, 0.0, t_end, dt_fn(step), magnitude, monitor, check)
    wall = time.time() - started

    result = RunResult(case.name, resolution, u, grid, t, steps, h, wall_time=wall, error_history=history)
    if case.exact is not None:
        result.L1, result.Linf = error_norms(u[comp][mask], exact(t)[comp])
        logger.info(f"{case.name} resolution {resolution}: {steps} steps in {wall:.1f}s, "
                    f"L1={result.L1:.3e} Linf={result.Linf:.3e}")
    else:
        logger.info(f"{case.name} resolution {resolution}: {steps} steps in {wall:.1f}s")
    return result


def _orders(h: np.ndarray, err: np.ndarray) -> np.ndarray:
    orders = np.full(len(err), np.nan)
    with np.errstate(divide='ignore', invalid='ignore'):
        orders[1:] = np.log(err[:-1] / err[1:]) / np.log(h[:-1] / h[1:])
    return orders


def convergence_table(case: ProblemCase, scheme: str, silw: SILWConfig, resolutions: Sequence,
                      step: Optional[StepControl] = None, threads: int = 1,
                      on_result: Optional[Callable[[RunResult], None]] = None) -> pd.DataFrame:
    """Errors and observed orders for a refinement sequence; runs may execute in parallel"""
    if len(resolutions) < 2:
        raise ConfigError("convergence table needs at least two resolutions")
    if case.exact is None:
        raise ConfigError(f"{case.name} has no exact solution")
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(lambda r: run_case(case, scheme, silw, r, step), resolutions))
    if on_result is not None:
        for r in results:
            on_result(r)
    h = np.array([r.h for r in results])
    L1 = np.array([r.L1 for r in results])
    Linf = np.array([r.Linf for r in results])
    return pd.DataFrame({
        'resolution': list(resolutions),
        'h': h,
        'L1': L1,
        'L1_order': _orders(h, L1),
        'Linf': Linf,
        'Linf_order': _orders(h, Linf),
    })


def write_field(result: RunResult, path, components: Optional[Sequence[int]] = None) -> None:
    """Plain-text snapshot: `x value...` rows in 1D, `x y value...` rows over interior points in 2D"""
    grid = result.grid
    comps = list(range(result.field.shape[0])) if components is None else list(components)
    if getattr(grid, 'kind', None) is None:
        columns = {'x': grid.coordinates()}
        values = result.field[:, grid.interior]
    else:
        X, Y = grid.meshgrid()
        mask = grid.interior_mask
        columns = {'x': X[mask], 'y': Y[mask]}
        values = result.field[:, mask]
    for c in comps:
        columns[f"u{c}"] = values[c]
    pd.DataFrame(columns).to_csv(path, sep=' ', index=False, header=False, float_format=FLOAT_FORMAT)
    logger.info(f"wrote field snapshot {path}")


def reference_blast_wave(case: ProblemCase, dx: float = 1.0 / 2560, scheme: str = 'weno5',
                         step: Optional[StepControl] = None) -> RunResult:
    """Fine-grid reference for the blast-wave problem with the original closure and full ILW terms"""
    N = int(round((case.domain[1] - case.domain[0]) / dx - case.C_a - case.C_b))
    d = scheme_order(scheme)
    silw = SILWConfig(d, min(2, d), case.alpha, 'weno', 'original')
    return run_case(case, scheme, silw, N, step)


def interpolate_reference(reference: RunResult, x: np.ndarray, component: int = 0) -> np.ndarray:
    return np.interp(x, reference.grid.coordinates(), reference.field[component, reference.grid.interior])
