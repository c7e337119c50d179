#!/usr/bin/env python3
"""
Ghost filling on embedded 2D Cartesian grids.
Geometry ghosts use least-squares polynomials of the nearby interior points,
evaluated at the foot point, along the normal line and at the ghost itself;
box ghosts use the side conditions of the bounding box.
"""

import math
import logging
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from errors import ConfigError, GeometryError
from equations import euler_eigen_arrays, euler_jacobian, rotate_state, unrotate_state
from boundary import (SILWConfig, EPS_SONIC_FACTOR, WENO_EXTRAPOLATION_EPS, Extrapolator, hermite_weights,
                      incoming_characteristics, lagrange_weights, solve_boundary_derivative, solve_boundary_state)
from timeint import STAGE_TIMES, stage_boundary_data

logger = logging.getLogger(__name__)

STENCIL_GROWTH = 1.25
MAX_STENCIL_GROWTHS = 24

VALUE, DX, DY = 0, 1, 2


def monomial_exponents(degree: int) -> List[Tuple[int, int]]:
    """(i, j) with i + j <= degree, ordered by total degree so candidates nest"""
    return [(deg - j, j) for deg in range(degree + 1) for j in range(deg + 1)]


def design_rows(xi, eta, exponents, dxi: int = 0, deta: int = 0) -> np.ndarray:
    """d^(dxi+deta)/dxi^dxi deta^deta of every monomial at the points (xi, eta)"""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    cols = []
    for i, j in exponents:
        coef = math.perm(i, dxi) * math.perm(j, deta)
        cols.append(coef * xi ** max(i - dxi, 0) * eta ** max(j - deta, 0))
    return np.column_stack(cols)


class BoundaryField2D:
    """Boundary data g(x, y, t) with time derivatives and, optionally, the spatial gradient"""

    def __init__(self, derivatives: Sequence[Callable], gradient: Optional[Callable] = None):
        if not derivatives:
            raise ValueError("boundary field needs at least g itself")
        self.derivatives = list(derivatives)
        self.gradient = gradient

    @property
    def max_order(self) -> int:
        return len(self.derivatives) - 1

    def __call__(self, x, y, t: float, order: int = 0):
        if order > self.max_order:
            raise ValueError(f"boundary data has derivatives up to order {self.max_order}, asked for {order}")
        return self.derivatives[order](x, y, t)

    def at(self, x, y) -> '_PointData':
        return _PointData(self, x, y)


class _PointData:
    """g restricted to fixed points, callable as g(t, order) for stage corrections"""

    def __init__(self, field: BoundaryField2D, x, y):
        self.field = field
        self.x = x
        self.y = y
        self.max_order = field.max_order

    def __call__(self, t: float, order: int = 0):
        return np.asarray(self.field(self.x, self.y, t, order), dtype=float)


class LeastSquaresStencils:
    """
    Per-ghost least-squares reconstruction from interior points near the foot point.
    Each ghost gets a weight matrix W (n_eval, K) with values at its evaluation
    points = W @ u(stencil); stencils are zero-padded to a common K.
    """

    def __init__(self, grid, config: SILWConfig, eval_points: np.ndarray):
        self.grid = grid
        self.d = config.d
        self.mode = config.extrapolation_mode
        self.h = max(grid.dx, grid.dy)
        self.exponents = monomial_exponents(self.d - 1)
        n_mono = len(self.exponents)

        pts = grid.interior_points()
        if len(pts) < 2 * n_mono:
            raise GeometryError(f"only {len(pts)} interior points for a degree {self.d - 1} fit")
        ii, jj = np.nonzero(grid.interior_mask)
        tree = cKDTree(pts)

        G = grid.n_ghosts
        stencils = []
        for g in range(G):
            stencils.append(self._select(tree, pts, grid.foot_points[g], n_mono))
        K = max(len(s) for s in stencils)
        self.si = np.zeros((G, K), dtype=int)
        self.sj = np.zeros((G, K), dtype=int)
        n_eval = eval_points.shape[1]
        n_cand = self.d if self.mode == 'weno' else 1
        self.W = np.zeros((n_cand, G, n_eval + 3, K))
        self.C = np.zeros((n_cand, G, n_mono, K)) if self.mode == 'weno' else None
        factorials = np.array([math.factorial(i) * math.factorial(j) for i, j in self.exponents], dtype=float)

        for g, stencil in enumerate(stencils):
            k = len(stencil)
            self.si[g, :k] = ii[stencil]
            self.sj[g, :k] = jj[stencil]
            self.si[g, k:] = ii[stencil[0]]
            self.sj[g, k:] = jj[stencil[0]]
            Pa = grid.foot_points[g]
            xi = (pts[stencil, 0] - Pa[0]) / self.h
            eta = (pts[stencil, 1] - Pa[1]) / self.h
            V = design_rows(xi, eta, self.exponents)
            E = [design_rows(0.0, 0.0, self.exponents)]
            E.append(design_rows(0.0, 0.0, self.exponents, 1, 0) / self.h)
            E.append(design_rows(0.0, 0.0, self.exponents, 0, 1) / self.h)
            ex = (eval_points[g, :, 0] - Pa[0]) / self.h
            ey = (eval_points[g, :, 1] - Pa[1]) / self.h
            E.append(design_rows(ex, ey, self.exponents))
            E = np.vstack(E)
            degrees = range(self.d) if self.mode == 'weno' else [self.d - 1]
            for c, r in enumerate(degrees):
                n_r = (r + 1) * (r + 2) // 2
                P = np.linalg.pinv(V[:, :n_r])
                self.W[c, g, :, :k] = E[:, :n_r] @ P
                if self.C is not None:
                    self.C[c, g, :n_r, :k] = factorials[:n_r, None] * P
        if self.mode == 'weno':
            self.linear_weights = self.h ** (self.d - 1 - np.arange(self.d))
        logger.debug(f"least-squares stencils: {G} ghosts, up to {K} points each")

    def _select(self, tree, pts, Pa, n_mono) -> np.ndarray:
        radius = (self.d + 1) * self.h
        for _ in range(MAX_STENCIL_GROWTHS):
            stencil = np.array(sorted(tree.query_ball_point(Pa, radius)), dtype=int)
            if len(stencil) >= 2 * n_mono:
                xi = (pts[stencil] - Pa) / self.h
                V = design_rows(xi[:, 0], xi[:, 1], self.exponents)
                if np.linalg.matrix_rank(V) == n_mono:
                    return stencil
            radius *= STENCIL_GROWTH
        raise GeometryError("no well-posed least-squares stencil", location=tuple(Pa))

    def evaluate(self, field: np.ndarray) -> np.ndarray:
        """(n_vars, G, n_rows): value, d/dx, d/dy at the foot point, then the evaluation points"""
        vals = field[:, self.si, self.sj]
        if self.mode == 'lagrange':
            return np.einsum('gek,vgk->vge', self.W[0], vals)
        coeffs = np.einsum('rgmk,vgk->rvgm', self.C, vals)
        beta = np.sum(coeffs[..., 1:] ** 2, axis=-1)
        beta[0] = self.h ** 2
        a = self.linear_weights[:, None, None] / (WENO_EXTRAPOLATION_EPS + beta) ** 2
        omega = a / a.sum(axis=0, keepdims=True)
        candidates = np.einsum('rgek,vgk->rvge', self.W, vals)
        return np.einsum('rvg,rvge->vge', omega, candidates)


class Boundary2D:
    """
    Ghost filling for an embedded grid.
    geometry_kind is 'wall' or 'inflow'; inflow boundaries take their data from
    `data` and switch per ghost between prescribed and extrapolated characteristics.
    side_states maps box sides with condition 'inflow-state' to U(x, y, t).
    """

    def __init__(self, equation, grid, config: SILWConfig, geometry_kind: str = 'wall',
                 data: Optional[BoundaryField2D] = None,
                 side_states: Optional[Dict[str, Callable]] = None):
        if config.k_d > 2:
            raise ConfigError(f"2D boundaries support k_d <= 2, got {config.k_d}")
        if geometry_kind not in ('wall', 'inflow'):
            raise ConfigError(f"unknown geometry boundary kind {geometry_kind!r}")
        if geometry_kind == 'wall' and not equation.is_system:
            raise ConfigError("wall boundaries need the Euler equations")
        if geometry_kind == 'inflow' and data is None and grid.n_ghosts:
            raise ConfigError("inflow geometry needs boundary data")
        if not equation.is_system and not equation.linear:
            raise ConfigError("2D scalar boundaries support linear advection only")
        self.equation = equation
        self.grid = grid
        self.config = config
        self.geometry_kind = geometry_kind
        self.data = data
        self.side_states = dict(side_states or {})
        for side, condition in grid.sides.items():
            if condition == 'inflow-state' and side not in self.side_states:
                raise ConfigError(f"side {side} is 'inflow-state' but no state was given")

        d = config.d
        delta = grid.delta
        self.delta = delta
        G = grid.n_ghosts
        X, Y = grid.meshgrid()
        self.ghost_xy = np.column_stack([X[grid.ghost_index], Y[grid.ghost_index]]) if G else np.zeros((0, 2))
        n = grid.normals
        self.tangents = np.column_stack([-n[:, 1], n[:, 0]]) if G else np.zeros((0, 2))
        self.s_ghost = grid.distances / delta if G else np.zeros(0)

        # evaluation points: the ghost, aux points for k_d = 1..d-1 aux counts, normal-line points
        self.n_aux = d - 1
        aux_s = -config.alpha * np.arange(1, self.n_aux + 1)
        line_s = -np.arange(d, dtype=float)
        points = [self.ghost_xy[:, None, :]]
        points.append(grid.foot_points[:, None, :] + aux_s[None, :, None] * delta * n[:, None, :])
        points.append(grid.foot_points[:, None, :] + line_s[None, :, None] * delta * n[:, None, :])
        self.row_ghost = 3
        self.rows_aux = slice(4, 4 + self.n_aux)
        self.rows_line = slice(4 + self.n_aux, 4 + self.n_aux + d)
        self.stencils = LeastSquaresStencils(grid, config, np.concatenate(points, axis=1)) if G else None

        self.closures = {}
        for k_d in sorted({config.k_d, 1}):
            aux = aux_s[:d - k_d]
            self.closures[k_d] = hermite_weights(k_d, aux, self.s_ghost) if G else None
        self.taylor = np.array([self.s_ghost ** k / math.factorial(k) for k in range(d)]).T if G else None
        self.line_derivatives = np.vstack([lagrange_weights(line_s, [0.0], k) for k in range(d)])

        self.outflow = {}
        self._sonic_logged = False

    # ------------------------------------------------------------------
    def fill(self, field: np.ndarray, t_n: float = 0.0, dt: float = 0.0, stage: int = 0) -> np.ndarray:
        if self.grid.n_ghosts:
            ghosts = self._geometry_ghosts(field, t_n, dt, stage)
            field[:, self.grid.ghost_index[0], self.grid.ghost_index[1]] = ghosts
        self._box_ghosts(field, t_n + STAGE_TIMES[stage] * dt)
        return field

    def _boundary_values(self, t_n, dt, stage, order):
        Pa = self.grid.foot_points
        return np.asarray(stage_boundary_data(self.data.at(Pa[:, 0], Pa[:, 1]), t_n, dt, stage, order), dtype=float)

    def _closure(self, D: np.ndarray, recon: np.ndarray, k_d: int, sel: np.ndarray) -> np.ndarray:
        """D (n_vars, S, k_d) in s units and the reconstruction rows of ghosts `sel` -> ghosts (n_vars, S)"""
        d = self.config.d
        if self.config.treatment == 'original' and k_d == self.config.k_d:
            line = recon[..., self.rows_line]
            high = np.einsum('vgj,kj->vgk', line, self.line_derivatives[k_d:])
            full = np.concatenate([D[..., :k_d], high], axis=-1)
            return np.einsum('vgk,gk->vg', full, self.taylor[sel])
        W_D, W_aux = self.closures[k_d]
        out = np.einsum('vgk,gk->vg', D[..., :k_d], W_D[sel])
        if d - k_d:
            out += np.einsum('vgk,gk->vg', recon[..., self.rows_aux][..., :d - k_d], W_aux[sel])
        return out

    def _geometry_ghosts(self, field, t_n, dt, stage) -> np.ndarray:
        recon = self.stencils.evaluate(field)
        if self.equation.is_system:
            return self._euler_ghosts(recon, t_n, dt, stage)
        return self._scalar_ghosts(recon, t_n, dt, stage)

    def _scalar_ghosts(self, recon, t_n, dt, stage) -> np.ndarray:
        a = np.asarray(self.equation.speeds)
        a_n = self.grid.normals @ a
        a_tau = self.tangents @ a
        ghosts = recon[:, :, self.row_ghost].copy()

        sonic = np.abs(a_n) <= EPS_SONIC_FACTOR
        inflow = a_n < -EPS_SONIC_FACTOR
        if not (sonic.any() or inflow.any()):
            return ghosts

        g0 = self._boundary_values(t_n, dt, stage, 0).reshape(1, -1)
        if sonic.any():
            if not self._sonic_logged:
                logger.warning(f"{int(sonic.sum())} boundary point(s) near sonic; value-only closure")
                self._sonic_logged = True
            D = g0[..., None]
            sel = np.nonzero(sonic)[0]
            ghosts[:, sel] = self._closure(D[:, sel], recon[:, sel], 1, sel)
        if inflow.any():
            D = [g0]
            if self.config.k_d >= 2:
                g_t = self._boundary_values(t_n, dt, stage, 1).reshape(1, -1)
                if self.data.gradient is not None:
                    Pa = self.grid.foot_points
                    grad = np.asarray(self.data.gradient(Pa[:, 0], Pa[:, 1], t_n + STAGE_TIMES[stage] * dt))
                    u_tau = grad[0] * self.tangents[:, 0] + grad[1] * self.tangents[:, 1]
                else:
                    u_tau = recon[0, :, DX] * self.tangents[:, 0] + recon[0, :, DY] * self.tangents[:, 1]
                with np.errstate(divide='ignore', invalid='ignore'):
                    u_n = (-g_t - a_tau * u_tau) / a_n
                D.append(self.delta * u_n)
            D = np.stack(D, axis=-1)
            sel = np.nonzero(inflow)[0]
            ghosts[:, sel] = self._closure(D[:, sel], recon[:, sel], self.config.k_d, sel)
        return ghosts

    def _euler_ghosts(self, recon, t_n, dt, stage) -> np.ndarray:
        gamma = self.equation.gamma
        theta = self.grid.thetas
        n = self.grid.normals
        tau = self.tangents
        G = self.grid.n_ghosts
        ghosts = recon[:, :, self.row_ghost].copy()

        U_ext0 = rotate_state(recon[:, :, VALUE], theta)
        lam, R, L, c, H = euler_eigen_arrays(U_ext0, gamma)
        if self.geometry_kind == 'wall':
            incoming = np.zeros((G, 4), dtype=bool)
            incoming[:, 0] = True
            given = np.zeros((G, 4))
            given_t = np.zeros((G, 4))
        else:
            given = rotate_state(self._boundary_values(t_n, dt, stage, 0), theta).T
            given_t = rotate_state(self._boundary_values(t_n, dt, stage, 1), theta).T
            incoming = incoming_characteristics(lam)

        active = incoming.any(axis=1)
        if not active.any():
            return ghosts
        sel = np.nonzero(active)[0]

        U0 = solve_boundary_state(L[sel], U_ext0[:, sel].T, incoming[sel], given[sel])
        D = [U0.T]
        if self.config.k_d >= 2:
            grad_x, grad_y = recon[:, sel, DX], recon[:, sel, DY]
            U_n = rotate_state(grad_x * n[sel, 0] + grad_y * n[sel, 1], theta[sel])
            U_tau = rotate_state(grad_x * tau[sel, 0] + grad_y * tau[sel, 1], theta[sel])
            A = euler_jacobian(U0.T, gamma, axis=0)
            B = euler_jacobian(U0.T, gamma, axis=1)
            res = -np.einsum('gij,gj->gi', B, U_tau.T)
            lam0, _, L0, c0, _ = euler_eigen_arrays(U0.T, gamma)
            U1 = solve_boundary_derivative(A, L0, U_n.T, incoming[sel], given_t[sel], res, lam0, c0)
            D.append(self.delta * U1.T)
        D = np.stack(D, axis=-1)

        sub = recon[:, sel]
        rotated = sub.copy()
        for rows in (self.rows_aux, self.rows_line):
            rotated[:, :, rows] = rotate_state(sub[:, :, rows], theta[sel][:, None])
        hat = self._closure(D, rotated, self.config.k_d, sel)
        ghosts[:, sel] = unrotate_state(hat, theta[sel])
        return ghosts

    # ------------------------------------------------------------------
    def _box_ghosts(self, field: np.ndarray, t: float):
        grid = self.grid
        g, nx, ny = grid.n_ghost, grid.nx, grid.ny
        X, Y = grid.meshgrid()
        for side, (I, J) in grid.box_ghosts.items():
            if not len(I):
                continue
            condition = grid.sides[side]
            if condition == 'inflow-state':
                field[:, I, J] = np.asarray(self.side_states[side](X[I, J], Y[I, J], t), dtype=float)
            elif condition == 'reflect':
                self._reflect(field, side, I, J, g, nx, ny)
            elif condition == 'outflow':
                self._extrapolate_side(field, side, I, J, g, nx, ny)

    def _reflect(self, field, side, I, J, g, nx, ny):
        if side == 'left':
            si, sj, comp = 2 * g - 1 - I, J, 1
        elif side == 'right':
            si, sj, comp = 2 * (g + nx) - 1 - I, J, 1
        elif side == 'bottom':
            si, sj, comp = I, 2 * g - 1 - J, 2
        else:
            si, sj, comp = I, 2 * (g + ny) - 1 - J, 2
        field[:, I, J] = field[:, si, sj]
        if self.equation.is_system:
            field[comp, I, J] = -field[comp, si, sj]

    def _extrapolator(self, h: float) -> Extrapolator:
        if h not in self.outflow:
            self.outflow[h] = Extrapolator(-np.arange(self.config.d, dtype=float), h,
                                           self.config.extrapolation_mode)
        return self.outflow[h]

    def _extrapolate_side(self, field, side, I, J, g, nx, ny):
        d = self.config.d
        m = np.arange(d)
        if side in ('left', 'right'):
            edge = g if side == 'left' else g + nx - 1
            step = 1 if side == 'left' else -1
            sigma = np.abs(I - edge)
            extrapolator = self._extrapolator(self.grid.dx)
            ni = edge + step * m[None, :] + 0 * I[:, None]
            nj = J[:, None] + 0 * m[None, :]
        else:
            edge = g if side == 'bottom' else g + ny - 1
            step = 1 if side == 'bottom' else -1
            sigma = np.abs(J - edge)
            extrapolator = self._extrapolator(self.grid.dy)
            ni = I[:, None] + 0 * m[None, :]
            nj = edge + step * m[None, :] + 0 * J[:, None]
        n_vars = field.shape[0]
        for s in np.unique(sigma):
            pick = sigma == s
            values = field[:, ni[pick], nj[pick]].reshape(-1, d)
            out = extrapolator.evaluate(values, [float(s)])[:, 0]
            field[:, I[pick], J[pick]] = out.reshape(n_vars, -1)


def fill_ghosts_2d(equation, field: np.ndarray, grid, config: SILWConfig, geometry_kind: str = 'wall',
                   data: Optional[BoundaryField2D] = None, side_states: Optional[Dict[str, Callable]] = None,
                   t_n: float = 0.0, dt: float = 0.0, stage: int = 0) -> np.ndarray:
    """One-shot fill; drivers keep a Boundary2D so stencils are built once"""
    return Boundary2D(equation, grid, config, geometry_kind, data, side_states).fill(field, t_n, dt, stage)
