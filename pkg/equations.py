#!/usr/bin/env python3
"""
Flux models: linear advection, Burgers, 1D and 2D compressible Euler
Fields are stored variables-first: shape (n_vars, n) in 1D and (n_vars, nx, ny) in 2D
"""

import math
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from errors import NumericalError

logger = logging.getLogger(__name__)


class ScalarAdvection:
    """f(u) = a u, with one speed per coordinate direction"""
    n_vars = 1
    is_system = False
    name = 'advection'

    def __init__(self, speeds: Sequence[float] = (1.0,)):
        self.speeds = tuple(float(a) for a in np.atleast_1d(speeds))
        self.dim = len(self.speeds)

    @property
    def linear(self) -> bool:
        return True

    def flux(self, U: np.ndarray, axis: int = 0) -> np.ndarray:
        return self.speeds[axis] * U

    def max_speed(self, U: np.ndarray, axis: int = 0) -> float:
        return abs(self.speeds[axis])

    def derivative(self, u, direction: Sequence[float] = None):
        """f'(u) projected on a direction"""
        return np.full_like(np.asarray(u, dtype=float), self.normal_speed(direction))

    def second_derivative(self, u, direction: Sequence[float] = None):
        return np.zeros_like(np.asarray(u, dtype=float))

    def normal_speed(self, direction: Sequence[float] = None) -> float:
        if direction is None:
            return self.speeds[0]
        return float(np.dot(self.speeds, np.atleast_1d(direction)))


class Burgers:
    """f(u) = u^2/2 in every coordinate direction"""
    n_vars = 1
    is_system = False
    name = 'burgers'
    linear = False

    def __init__(self, dim: int = 1):
        self.dim = dim

    def flux(self, U: np.ndarray, axis: int = 0) -> np.ndarray:
        return 0.5 * U * U

    def max_speed(self, U: np.ndarray, axis: int = 0) -> float:
        return float(np.max(np.abs(U)))

    def derivative(self, u, direction: Sequence[float] = None):
        scale = 1.0 if direction is None else float(np.sum(direction))
        return scale * np.asarray(u, dtype=float)

    def second_derivative(self, u, direction: Sequence[float] = None):
        scale = 1.0 if direction is None else float(np.sum(direction))
        return np.full_like(np.asarray(u, dtype=float), scale)


# ---------------------------------------------------------------------------
# Euler
# ---------------------------------------------------------------------------

@dataclass
class EulerEigen:
    lam: np.ndarray
    R: np.ndarray
    L: np.ndarray
    c: float
    H: float


def primitives_1d(U: np.ndarray, gamma: float):
    rho = U[0]
    u = U[1] / rho
    p = (gamma - 1.0) * (U[2] - 0.5 * rho * u * u)
    return rho, u, p


def conserved_1d(rho, u, p, gamma: float) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    return np.array([rho, rho * u, p / (gamma - 1.0) + 0.5 * rho * u * u])


def primitives_2d(U: np.ndarray, gamma: float):
    rho = U[0]
    u = U[1] / rho
    v = U[2] / rho
    p = (gamma - 1.0) * (U[3] - 0.5 * rho * (u * u + v * v))
    return rho, u, v, p


def conserved_2d(rho, u, v, p, gamma: float) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    return np.array([rho, rho * u, rho * v, p / (gamma - 1.0) + 0.5 * rho * (u * u + v * v)])


def _check_physical(rho, p, location=None):
    rho = np.asarray(rho)
    p = np.asarray(p)
    bad = ~((rho > 0) & (p > 0) & np.isfinite(rho) & np.isfinite(p))
    if np.any(bad):
        k = int(np.argmax(bad.ravel()))
        raise NumericalError(f"nonphysical state rho={rho.ravel()[k]:.6g} p={p.ravel()[k]:.6g}",
                             location=location)


def _matrix(rows, like) -> np.ndarray:
    """Stack nested rows of scalars/arrays into (n, n, ...) and move the matrix axes last"""
    zeros = np.zeros_like(like, dtype=float)
    M = np.array([[zeros + entry for entry in row] for row in rows])
    return np.moveaxis(M, (0, 1), (-2, -1))


def euler_eigen_arrays(U: np.ndarray, gamma: float, location=None):
    """
    Eigenvalues, right and left eigenvectors of the x-direction flux Jacobian.
    U has shape (n_vars,) or (n_vars, G); matrices come back as (..., n, n).
    """
    U = np.asarray(U, dtype=float)
    if U.shape[0] == 3:
        rho, u, p = primitives_1d(U, gamma)
        _check_physical(rho, p, location)
        c = np.sqrt(gamma * p / rho)
        H = c * c / (gamma - 1.0) + 0.5 * u * u
        b1 = (gamma - 1.0) / (c * c)
        b2 = 0.5 * b1 * u * u
        R = _matrix([[1.0, 1.0, 1.0],
                     [u - c, u, u + c],
                     [H - u * c, 0.5 * u * u, H + u * c]], u)
        L = _matrix([[0.5 * (b2 + u / c), -0.5 * (b1 * u + 1.0 / c), 0.5 * b1],
                     [1.0 - b2, b1 * u, -b1],
                     [0.5 * (b2 - u / c), -0.5 * (b1 * u - 1.0 / c), 0.5 * b1]], u)
        lam = np.moveaxis(np.array([u - c, u, u + c]), 0, -1)
        return lam, R, L, c, H

    rho, u, v, p = primitives_2d(U, gamma)
    _check_physical(rho, p, location)
    c = np.sqrt(gamma * p / rho)
    q2 = u * u + v * v
    H = c * c / (gamma - 1.0) + 0.5 * q2
    b1 = (gamma - 1.0) / (c * c)
    b2 = 0.5 * b1 * q2
    R = _matrix([[1.0, 1.0, 0.0, 1.0],
                 [u - c, u, 0.0, u + c],
                 [v, v, 1.0, v],
                 [H - u * c, 0.5 * q2, v, H + u * c]], u)
    L = _matrix([[0.5 * (b2 + u / c), -0.5 * (b1 * u + 1.0 / c), -0.5 * b1 * v, 0.5 * b1],
                 [1.0 - b2, b1 * u, b1 * v, -b1],
                 [-v, 0.0, 1.0, 0.0],
                 [0.5 * (b2 - u / c), -0.5 * (b1 * u - 1.0 / c), -0.5 * b1 * v, 0.5 * b1]], u)
    lam = np.moveaxis(np.array([u - c, u, u, u + c]), 0, -1)
    return lam, R, L, c, H


def euler_eigenstructure(U: np.ndarray, gamma: float, direction=None, location=None) -> EulerEigen:
    """
    Eigen-decomposition of the flux Jacobian along `direction`.
    1D: direction is +1 or -1 (the state is reflected when -1).
    2D: direction is a unit vector; the state is rotated so that u_hat = (u, v).n
    The returned R, L act on the reflected / rotated state.
    """
    U = np.asarray(U, dtype=float)
    if direction is not None:
        if U.shape[0] == 3:
            U = reflect_state(U, float(direction))
        else:
            U = rotate_state(U, math.atan2(direction[1], direction[0]))
    lam, R, L, c, H = euler_eigen_arrays(U, gamma, location)
    return EulerEigen(lam, R, L, float(c), float(H))


def euler_jacobian(U: np.ndarray, gamma: float, axis: int = 0) -> np.ndarray:
    """Flux Jacobian dF/dU (axis 0) or dG/dU (axis 1, 2D only); batched like euler_eigen_arrays"""
    U = np.asarray(U, dtype=float)
    g1 = gamma - 1.0
    if U.shape[0] == 3:
        rho, u, p = primitives_1d(U, gamma)
        H = (U[2] + p) / rho
        return _matrix([[0.0, 1.0, 0.0],
                        [0.5 * (gamma - 3.0) * u * u, (3.0 - gamma) * u, g1],
                        [u * (0.5 * g1 * u * u - H), H - g1 * u * u, gamma * u]], u)

    rho, u, v, p = primitives_2d(U, gamma)
    H = (U[3] + p) / rho
    k = 0.5 * g1 * (u * u + v * v)
    if axis == 0:
        return _matrix([[0.0, 1.0, 0.0, 0.0],
                        [k - u * u, (3.0 - gamma) * u, -g1 * v, g1],
                        [-u * v, v, u, 0.0],
                        [u * (k - H), H - g1 * u * u, -g1 * u * v, gamma * u]], u)
    return _matrix([[0.0, 0.0, 1.0, 0.0],
                    [-u * v, v, u, 0.0],
                    [k - v * v, -g1 * u, (3.0 - gamma) * v, g1],
                    [v * (k - H), -g1 * u * v, H - g1 * v * v, gamma * v]], u)


def rotate_state(U: np.ndarray, theta: float) -> np.ndarray:
    """(rho, rho u, rho v, E) -> (rho, rho u_hat, rho v_hat, E) with x_hat along (cos, sin)"""
    U = np.asarray(U, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    out = U.copy()
    out[1] = c * U[1] + s * U[2]
    out[2] = -s * U[1] + c * U[2]
    return out


def unrotate_state(U: np.ndarray, theta: float) -> np.ndarray:
    return rotate_state(U, -theta)


def reflect_state(U: np.ndarray, direction: float) -> np.ndarray:
    """1D outward frame: momentum times the outward normal sign"""
    out = np.array(U, dtype=float, copy=True)
    out[1] = out[1] * direction
    return out


class Euler1D:
    n_vars = 3
    is_system = True
    dim = 1
    name = 'euler1d'
    linear = False

    def __init__(self, gamma: float = 1.4):
        self.gamma = float(gamma)

    def flux(self, U: np.ndarray, axis: int = 0) -> np.ndarray:
        rho, u, p = primitives_1d(U, self.gamma)
        return np.array([U[1], U[1] * u + p, (U[2] + p) * u])

    def max_speed(self, U: np.ndarray, axis: int = 0) -> float:
        rho, u, p = primitives_1d(U, self.gamma)
        c = np.sqrt(self.gamma * np.abs(p / rho))
        return float(np.max(np.abs(u) + c))

    def check_positivity(self, U: np.ndarray, step: Optional[int] = None):
        rho, u, p = primitives_1d(U, self.gamma)
        bad = ~((rho > 0) & (p > 0))
        if np.any(bad):
            index = int(np.argmax(bad))
            raise NumericalError(f"nonpositive density or pressure (rho={rho[index]:.4g}, p={p[index]:.4g})",
                                 location=index, step=step)

    def conserved(self, rho, u, p) -> np.ndarray:
        return conserved_1d(rho, u, p, self.gamma)

    def primitives(self, U: np.ndarray):
        return primitives_1d(U, self.gamma)


class Euler2D:
    n_vars = 4
    is_system = True
    dim = 2
    name = 'euler2d'
    linear = False

    def __init__(self, gamma: float = 1.4):
        self.gamma = float(gamma)

    def flux(self, U: np.ndarray, axis: int = 0) -> np.ndarray:
        rho, u, v, p = primitives_2d(U, self.gamma)
        if axis == 0:
            return np.array([U[1], U[1] * u + p, U[1] * v, (U[3] + p) * u])
        return np.array([U[2], U[2] * u, U[2] * v + p, (U[3] + p) * v])

    def max_speed(self, U: np.ndarray, axis: int = 0) -> float:
        rho, u, v, p = primitives_2d(U, self.gamma)
        c = np.sqrt(self.gamma * np.abs(p / rho))
        vel = u if axis == 0 else v
        return float(np.max(np.abs(vel) + c))

    def check_positivity(self, U: np.ndarray, step: Optional[int] = None):
        rho, u, v, p = primitives_2d(U, self.gamma)
        bad = ~((rho > 0) & (p > 0))
        if np.any(bad):
            index = np.unravel_index(int(np.argmax(bad)), bad.shape)
            raise NumericalError(f"nonpositive density or pressure (rho={rho[index]:.4g}, p={p[index]:.4g})",
                                 location=tuple(int(i) for i in index), step=step)

    def conserved(self, rho, u, v, p) -> np.ndarray:
        return conserved_2d(rho, u, v, p, self.gamma)

    def primitives(self, U: np.ndarray):
        return primitives_2d(U, self.gamma)
