#!/usr/bin/env python3
"""
Interior spatial discretization
Linear upwind operators of orders 3..13 and WENO3/WENO5 flux reconstruction,
both with global Lax-Friedrichs flux splitting
"""

import logging
from fractions import Fraction
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from errors import NumericalError

logger = logging.getLogger(__name__)

WENO_EPS = 1e-6

# L_h(u)_j = -(1/dx) sum_m c_m f_{j+m}, keyed by order d, offsets m = -(d+1)/2 .. (d-1)/2
_F = Fraction
UPWIND_COEFFICIENTS: Dict[int, Tuple[Fraction, ...]] = {
    3: (_F(1, 6), _F(-1), _F(1, 2), _F(1, 3)),
    5: (_F(-1, 30), _F(1, 4), _F(-1), _F(1, 3), _F(1, 2), _F(-1, 20)),
    7: (_F(1, 140), _F(-7, 105), _F(3, 10), _F(-1), _F(1, 4), _F(3, 5), _F(-1, 10), _F(1, 105)),
    9: (_F(-1, 630), _F(1, 56), _F(-2, 21), _F(1, 3), _F(-1), _F(1, 5), _F(2, 3), _F(-1, 7),
        _F(1, 42), _F(-1, 504)),
    11: (_F(1, 2772), _F(-1, 210), _F(5, 168), _F(-5, 42), _F(5, 14), _F(-1), _F(1, 6), _F(5, 7),
         _F(-5, 28), _F(5, 126), _F(-1, 168), _F(1, 2310)),
    13: (_F(-1, 12012), _F(1, 792), _F(-1, 110), _F(1, 24), _F(-5, 36), _F(3, 8), _F(-1), _F(1, 7),
         _F(3, 4), _F(-5, 24), _F(1, 18), _F(-1, 88), _F(1, 660), _F(-1, 10296)),
}

SUPPORTED_ORDERS = tuple(sorted(UPWIND_COEFFICIENTS))
SCHEMES = ('weno3', 'weno5') + tuple(f"upwind{d}" for d in SUPPORTED_ORDERS)


class UpwindStencil:
    """d-th order upwind-biased stencil with exact rational coefficients"""

    def __init__(self, d: int):
        if d not in UPWIND_COEFFICIENTS:
            raise ValueError(f"unsupported upwind order {d}; expected one of {SUPPORTED_ORDERS}")
        self.d = d
        self.rational = UPWIND_COEFFICIENTS[d]
        self.offsets = np.arange(-(d + 1) // 2, (d - 1) // 2 + 1)
        self.coefficients = np.array([float(c) for c in self.rational])

    @property
    def ghost_width(self) -> int:
        return (self.d + 1) // 2

    def symbol(self, xi) -> np.ndarray:
        """Fourier symbol of dx*L_h: -sum_m c_m e^{i m xi}"""
        xi = np.asarray(xi, dtype=float)
        return -np.exp(1j * np.multiply.outer(xi, self.offsets)) @ self.coefficients


def scheme_order(scheme: str) -> int:
    if scheme == 'weno3':
        return 3
    if scheme == 'weno5':
        return 5
    if scheme.startswith('upwind'):
        return int(scheme[len('upwind'):])
    raise ValueError(f"unknown scheme {scheme!r}")


def scheme_ghost_width(scheme: str) -> int:
    """Ghost points needed per side once both split fluxes are used"""
    if scheme == 'weno3':
        return 2
    if scheme == 'weno5':
        return 3
    return UpwindStencil(scheme_order(scheme)).ghost_width


def upwind_residual(d: int, f: np.ndarray, dx: float, n_ghost: Optional[int] = None) -> np.ndarray:
    """
    L_h(u)_j = -(1/dx) sum_m c_m f_{j+m} on the last axis.
    `f` carries n_ghost values on each side; the interior part is returned.
    """
    stencil = UpwindStencil(d)
    f = np.asarray(f, dtype=float)
    g = stencil.ghost_width if n_ghost is None else n_ghost
    if g < stencil.ghost_width:
        raise ValueError(f"order {d} needs {stencil.ghost_width} ghost values, got {g}")
    n = f.shape[-1] - 2 * g
    if n < 1:
        raise ValueError("flux array has no interior points")
    out = np.zeros(f.shape[:-1] + (n,))
    for m, c in zip(stencil.offsets, stencil.coefficients):
        out += c * f[..., g + m:g + m + n]
    return -out / dx


def _mirrored_upwind(d: int, f: np.ndarray, dx: float, g: int) -> np.ndarray:
    """Left-going counterpart: -(1/dx) * (-sum_m c_m f_{j-m})"""
    stencil = UpwindStencil(d)
    n = f.shape[-1] - 2 * g
    out = np.zeros(f.shape[:-1] + (n,))
    for m, c in zip(stencil.offsets, stencil.coefficients):
        out += c * f[..., g - m:g - m + n]
    return out / dx


# ---------------------------------------------------------------------------
# WENO
# ---------------------------------------------------------------------------

def _weno5_plus(v: np.ndarray) -> np.ndarray:
    """h[i] ~ value at i+1/2 from v[i-2..i+2]; zero where the window does not fit"""
    h = np.zeros_like(v)
    vm2, vm1, v0, vp1, vp2 = v[..., :-4], v[..., 1:-3], v[..., 2:-2], v[..., 3:-1], v[..., 4:]
    q0 = (2.0 * vm2 - 7.0 * vm1 + 11.0 * v0) / 6.0
    q1 = (-vm1 + 5.0 * v0 + 2.0 * vp1) / 6.0
    q2 = (2.0 * v0 + 5.0 * vp1 - vp2) / 6.0
    b0 = 13.0 / 12.0 * (vm2 - 2.0 * vm1 + v0) ** 2 + 0.25 * (vm2 - 4.0 * vm1 + 3.0 * v0) ** 2
    b1 = 13.0 / 12.0 * (vm1 - 2.0 * v0 + vp1) ** 2 + 0.25 * (vm1 - vp1) ** 2
    b2 = 13.0 / 12.0 * (v0 - 2.0 * vp1 + vp2) ** 2 + 0.25 * (3.0 * v0 - 4.0 * vp1 + vp2) ** 2
    a0 = 0.1 / (WENO_EPS + b0) ** 2
    a1 = 0.6 / (WENO_EPS + b1) ** 2
    a2 = 0.3 / (WENO_EPS + b2) ** 2
    h[..., 2:-2] = (a0 * q0 + a1 * q1 + a2 * q2) / (a0 + a1 + a2)
    return h


def _weno3_plus(v: np.ndarray) -> np.ndarray:
    """h[i] ~ value at i+1/2 from v[i-1..i+1]"""
    h = np.zeros_like(v)
    vm1, v0, vp1 = v[..., :-2], v[..., 1:-1], v[..., 2:]
    q0 = (-vm1 + 3.0 * v0) / 2.0
    q1 = (v0 + vp1) / 2.0
    a0 = (1.0 / 3.0) / (WENO_EPS + (v0 - vm1) ** 2) ** 2
    a1 = (2.0 / 3.0) / (WENO_EPS + (vp1 - v0) ** 2) ** 2
    h[..., 1:-1] = (a0 * q0 + a1 * q1) / (a0 + a1)
    return h


def _minus_from_plus(reconstruct, v: np.ndarray) -> np.ndarray:
    """Right-biased reconstruction at i+1/2 by mirroring the left-biased one"""
    hw = reconstruct(v[..., ::-1])[..., ::-1]
    h = np.zeros_like(v)
    h[..., :-1] = hw[..., 1:]
    return h


def _weno_interface_flux(order: int, f_plus: np.ndarray, f_minus: np.ndarray) -> np.ndarray:
    reconstruct = _weno5_plus if order == 5 else _weno3_plus
    return reconstruct(f_plus) + _minus_from_plus(reconstruct, f_minus)


def weno_flux(order: int, u_window, f_window, lf_alpha: float) -> float:
    """
    Interface flux at j+1/2 from a window u_{j-r+1}..u_{j+r} (2r values)
    with global Lax-Friedrichs splitting f = (f + a u)/2 + (f - a u)/2
    """
    if order not in (3, 5):
        raise ValueError(f"WENO order must be 3 or 5, got {order}")
    r = (order + 1) // 2
    u = np.asarray(u_window, dtype=float)
    f = np.asarray(f_window, dtype=float)
    if u.shape[-1] != 2 * r or f.shape != u.shape:
        raise ValueError(f"WENO{order} window must hold {2 * r} values")
    F = _weno_interface_flux(order, 0.5 * (f + lf_alpha * u), 0.5 * (f - lf_alpha * u))
    return F[..., r - 1]


# ---------------------------------------------------------------------------
# Residual of a whole field
# ---------------------------------------------------------------------------

def _axis_residual(scheme: str, u: np.ndarray, f: np.ndarray, alpha: float, dx: float) -> np.ndarray:
    """Residual along the last axis at every point whose stencil fits; zero elsewhere"""
    f_plus = 0.5 * (f + alpha * u)
    f_minus = 0.5 * (f - alpha * u)
    out = np.zeros_like(u)
    if scheme in ('weno3', 'weno5'):
        order = scheme_order(scheme)
        F = _weno_interface_flux(order, f_plus, f_minus)
        g = scheme_ghost_width(scheme)
        out[..., g:-g] = -(F[..., g:-g] - F[..., g - 1:-g - 1]) / dx
        return out
    d = scheme_order(scheme)
    g = UpwindStencil(d).ghost_width
    out[..., g:-g] = (upwind_residual(d, f_plus, dx, g) + _mirrored_upwind(d, f_minus, dx, g))
    return out


def lax_friedrichs_speeds(field: np.ndarray, equation, mesh,
                          active: Optional[np.ndarray] = None) -> Tuple[float, ...]:
    """Global splitting speed per axis, taken over the computed points only"""
    if getattr(mesh, 'kind', None) is None:
        return (equation.max_speed(field[:, mesh.interior], 0),)
    values = field[:, mesh.interior_mask if active is None else active]
    return equation.max_speed(values, 0), equation.max_speed(values, 1)


def residual_field(field: np.ndarray, equation, scheme: str, mesh,
                   active: Optional[np.ndarray] = None,
                   lf_speeds: Optional[Sequence[float]] = None) -> np.ndarray:
    """
    d/dt of every interior point given a ghost-filled field.
    1D meshes return (n_vars, N+1); 2D meshes return the padded shape with zeros off the interior.
    lf_speeds holds the splitting speed per axis; the solver freezes it for a whole RK step.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if lf_speeds is None:
        lf_speeds = lax_friedrichs_speeds(field, equation, mesh, active)

    if getattr(mesh, 'kind', None) is None:
        g = mesh.n_ghost
        res = _axis_residual(scheme, field, equation.flux(field, 0), lf_speeds[0], mesh.dx)[..., g:-g]
        if not np.all(np.isfinite(res)):
            bad = np.argwhere(~np.isfinite(res))[0]
            raise NumericalError("non-finite residual", location=tuple(int(i) for i in bad))
        return res

    interior = mesh.interior_mask
    res = np.zeros_like(field)
    with np.errstate(invalid='ignore', divide='ignore', over='ignore'):
        for axis, h in ((0, mesh.dx), (1, mesh.dy)):
            alpha = lf_speeds[axis]
            f = equation.flux(field, axis)
            if axis == 0:
                res += np.swapaxes(_axis_residual(scheme, np.swapaxes(field, 1, 2),
                                                  np.swapaxes(f, 1, 2), alpha, h), 1, 2)
            else:
                res += _axis_residual(scheme, field, f, alpha, h)
    res[:, ~interior] = 0.0
    if not np.all(np.isfinite(res[:, interior])):
        bad = np.argwhere(~np.isfinite(res) & interior[None])[0]
        raise NumericalError("non-finite residual", location=tuple(int(i) for i in bad[1:]))
    return res
