#!/usr/bin/env python3
"""
Third order TVD Runge-Kutta stepping with stage-corrected boundary data
"""

import math
import time
import logging
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from errors import BlowUpError, NumericalError

logger = logging.getLogger(__name__)

DEFAULT_CFL = 0.6
BLOWUP_THRESHOLD = 1e6
LOG_EVERY_SECONDS = 30.0

# stage s of the TVD-RK3 scheme samples the boundary data near t_n + STAGE_TIMES[s]*dt
STAGE_TIMES = (0.0, 1.0, 0.5)


@dataclass
class StepControl:
    """
    law 'cfl':         dt = cfl dx^{k/3} / a_x            (1D)
                       dt = cfl / (a_x/dx^{k/3} + a_y/dy^{k/3})   (2D)
    law 'fixed-ratio': dt = cfl dx
    """
    cfl: float = DEFAULT_CFL
    order: int = 3
    law: str = 'cfl'

    @property
    def exponent(self) -> float:
        return self.order / 3.0


def compute_dt(control: StepControl, a_x: float, dx: float,
               a_y: Optional[float] = None, dy: Optional[float] = None) -> float:
    if control.law == 'fixed-ratio':
        dt = control.cfl * dx
    elif not (a_x > 0 or (a_y is not None and a_y > 0)):
        raise NumericalError(f"no positive wave speed (a_x={a_x}, a_y={a_y})")
    elif a_y is None:
        dt = control.cfl * dx ** control.exponent / a_x
    else:
        dt = control.cfl / (a_x / dx ** control.exponent + a_y / dy ** control.exponent)
    if not (dt > 0 and math.isfinite(dt)):
        raise NumericalError(f"invalid time step {dt} (a_x={a_x}, a_y={a_y})")
    return dt


def stage_boundary_data(g, t_n: float, dt: float, stage: int, order: int = 0):
    """
    Boundary data to impose at an RK stage, for the data's `order`-th time derivative:
      stage 0: g(t_n)
      stage 1: g + dt g'
      stage 2: g + dt/2 g' + dt^2/4 g''
    Terms whose derivative is not available are dropped.
    """
    top = getattr(g, 'max_order', 2)
    value = g(t_n, order)
    if stage == 0:
        return value
    d1 = g(t_n, order + 1) if order + 1 <= top else 0.0
    if stage == 1:
        return value + dt * d1
    if stage == 2:
        d2 = g(t_n, order + 2) if order + 2 <= top else 0.0
        return value + 0.5 * dt * d1 + 0.25 * dt * dt * d2
    raise ValueError(f"RK3 has stages 0, 1, 2; got {stage}")


def rk3_step(field: np.ndarray, residual: Callable, fill: Callable, t_n: float, dt: float) -> np.ndarray:
    """
    u1 = u + dt L(u)
    u2 = 3/4 u + 1/4 u1 + 1/4 dt L(u1)
    u^{n+1} = 1/3 u + 2/3 u2 + 2/3 dt L(u2)
    fill(field, t_n, dt, stage) refreshes the ghost values in place before each residual.
    """
    u = field
    fill(u, t_n, dt, 0)
    u1 = u + dt * residual(u)
    fill(u1, t_n, dt, 1)
    u2 = 0.75 * u + 0.25 * (u1 + dt * residual(u1))
    fill(u2, t_n, dt, 2)
    return u / 3.0 + 2.0 / 3.0 * (u2 + dt * residual(u2))


def integrate(field: np.ndarray, residual: Callable, fill: Callable, t_start: float, t_end: float,
              dt_fn: Callable, magnitude: Callable = None, monitor: Callable = None,
              check: Callable = None, blowup: float = BLOWUP_THRESHOLD) -> Tuple[np.ndarray, float, int]:
    """
    March from t_start to t_end; the last step is shortened to land on t_end.
    magnitude(field) -> max |u| over the computed points, used for blow-up detection.
    monitor(step, t, field) is called after every step; check(field, step) may raise.
    """
    magnitude = magnitude or (lambda u: float(np.max(np.abs(u))))
    t = t_start
    step = 0
    last_log = time.time()
    u = field
    while t < t_end - 1e-12 * max(1.0, abs(t_end)):
        dt = min(dt_fn(u), t_end - t)
        try:
            u = rk3_step(u, residual, fill, t, dt)
        except NumericalError as e:
            if e.step is None:
                e.step = step
            raise
        t += dt
        step += 1

        size = magnitude(u)
        if not math.isfinite(size) or size > blowup:
            raise BlowUpError(f"solution magnitude {size:.3g} exceeded {blowup:.3g}", step=step, time=t)
        if check is not None:
            check(u, step)
        if monitor is not None:
            monitor(step, t, u)
        if time.time() - last_log > LOG_EVERY_SECONDS:
            logger.info(f"step {step}: t={t:.6g} / {t_end:g}, dt={dt:.3g}")
            last_log = time.time()
        logger.debug(f"step {step} t={t:.6g} dt={dt:.3g} max|u|={size:.4g}")
    return u, t, step
