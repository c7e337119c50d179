#!/usr/bin/env python3
"""
Linear stability analysis of the SILW closures for u_t + u_x = 0.
The semi-discrete system is dU/dt = (1/dx) Q U with the inflow closure at the
left boundary (g = 0) and Lagrange extrapolation at the right boundary.
Eigenvalues of Q that do not move as N changes belong to the boundary; the
scheme is stable when RK3 keeps them inside its stability region.
"""

import math
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import scipy.linalg

from errors import BlowUpError, ConfigError, NumericalError
from mesh import build_offset_grid
from reconstruction import SUPPORTED_ORDERS, UpwindStencil
from boundary import SILWConfig, SideClosure
from timeint import StepControl

logger = logging.getLogger(__name__)

Z_TOLERANCE = 1e-10
MATCH_TOLERANCE = 1e-6
MATCH_ROUNDING = 7
SCAN_C_B = 0.5
DEFAULT_N_SET = (20, 30, 40, 50)
CAUCHY_SAMPLES = 20001
CAUCHY_UPPER = 4.0
GROWTH_FACTOR = 100.0

DEFAULT_CA_GRID = tuple([1e-6] + [round(0.01 * k, 2) for k in range(1, 100)] + [1.0 - 1e-6])

SCAN_COLUMNS = ['C_a', 'alpha', 'n_fixed', 'max_abs_z', 'stable']


def default_n_set(d: int) -> Tuple[int, ...]:
    """Grid sizes used to separate boundary eigenvalues from the interior spectrum"""
    if 4 * d <= DEFAULT_N_SET[0]:
        return DEFAULT_N_SET
    return (4 * d, 4 * d + 10, 4 * d + 20, 4 * d + 30)


def rk3_polynomial(mu):
    """z(mu) = 1 + mu + mu^2/2 + mu^3/6"""
    mu = np.asarray(mu, dtype=complex)
    return 1.0 + mu + mu * mu / 2.0 + mu ** 3 / 6.0


def amplification(s, lam: float) -> float:
    """|z(mu)| at mu = s * lam"""
    return float(np.max(np.abs(rk3_polynomial(np.asarray(s, dtype=complex) * lam))))


# ---------------------------------------------------------------------------
# Cauchy problem
# ---------------------------------------------------------------------------

def cauchy_cfl_max(d: Optional[int] = None, coefficients: Optional[Sequence[float]] = None,
                   offsets: Optional[Sequence[int]] = None, tol: float = 1e-4) -> float:
    """
    Largest lambda with |z(lambda * symbol(xi))| <= 1 for every xi, by bisection.
    Either an upwind order d or explicit (coefficients, offsets) with
    dx L_h(u)_j = -sum c_m u_{j+m}.
    """
    xi = np.linspace(0.0, 2.0 * math.pi, CAUCHY_SAMPLES)
    if coefficients is None:
        symbol = UpwindStencil(d).symbol(xi)
    else:
        offsets = np.asarray(offsets)
        symbol = -np.exp(1j * np.multiply.outer(xi, offsets)) @ np.asarray(coefficients, dtype=float)

    def stable(lam):
        return np.max(np.abs(rk3_polynomial(lam * symbol))) <= 1.0 + 1e-12

    lo, hi = 0.0, CAUCHY_UPPER
    if stable(hi):
        raise NumericalError(f"stability limit above {CAUCHY_UPPER}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if stable(mid):
            lo = mid
        else:
            hi = mid
    return lo


def cauchy_table() -> pd.DataFrame:
    return pd.DataFrame({'d': list(SUPPORTED_ORDERS),
                         'cfl_max': [cauchy_cfl_max(d) for d in SUPPORTED_ORDERS]})


# ---------------------------------------------------------------------------
# Boundary-modified matrix
# ---------------------------------------------------------------------------

@dataclass
class DiscretizationMatrix:
    Q: np.ndarray
    d: int
    k_d: int
    alpha: float
    C_a: float
    N: int
    treatment: str
    periodic: bool = False


def assemble_Q(d: int, k_d: int, alpha: float, C_a: float, N: int, treatment: str = 'new',
               C_b: float = SCAN_C_B, periodic: bool = False) -> DiscretizationMatrix:
    """
    Fold the ghost closures into the upwind operator: Q = S E with E mapping the
    N+1 unknowns onto the ghost-extended vector and S the stencil rows.
    """
    stencil = UpwindStencil(d)
    n = N + 1
    if periodic:
        Q = np.zeros((n, n))
        for j in range(n):
            for m, c in zip(stencil.offsets, stencil.coefficients):
                Q[j, (j + m) % n] -= c
        return DiscretizationMatrix(Q, d, k_d, alpha, C_a, N, treatment, periodic=True)

    if N < 4 * d:
        raise ConfigError(f"N={N} too small for order {d}; need N >= {4 * d}")
    config = SILWConfig(d, k_d, alpha, 'lagrange', treatment)
    g = stencil.ghost_width
    grid = build_offset_grid(0.0, 1.0, N, C_a, C_b, g)
    _, left = SideClosure(grid, 'left', config).linear_maps()
    right = SideClosure(grid, 'right', config).outflow_map()

    E = np.zeros((n + 2 * g, n))
    E[g:g + n, :] = np.eye(n)
    for p in range(g):
        E[g - 1 - p, :d] = left[p]
        E[g + n + p, N - np.arange(d)] = right[p]

    S = np.zeros((n, n + 2 * g))
    for m, c in zip(stencil.offsets, stencil.coefficients):
        S[np.arange(n), g + np.arange(n) + m] = -c
    return DiscretizationMatrix(S @ E, d, k_d, alpha, C_a, N, treatment)


def eigenvalues(matrix: np.ndarray) -> np.ndarray:
    """All eigenvalues of a dense nonsymmetric matrix (LAPACK geev)"""
    matrix = np.asarray(matrix, dtype=float)
    if not np.all(np.isfinite(matrix)):
        raise NumericalError("matrix has non-finite entries")
    try:
        return scipy.linalg.eigvals(matrix, check_finite=False)
    except scipy.linalg.LinAlgError as e:
        raise NumericalError(f"eigenvalue iteration failed: {e}") from e


def _match(reference: np.ndarray, spectra: List[np.ndarray], tol: float) -> np.ndarray:
    ref = np.round(reference.real, MATCH_ROUNDING) + 1j * np.round(reference.imag, MATCH_ROUNDING)
    keep = np.ones(len(ref), dtype=bool)
    for spectrum in spectra:
        spectrum = np.round(spectrum.real, MATCH_ROUNDING) + 1j * np.round(spectrum.imag, MATCH_ROUNDING)
        distance = np.min(np.abs(ref[:, None] - spectrum[None, :]), axis=1)
        keep &= distance <= tol
    return reference[keep]


def fixed_eigenvalues(d: int, k_d: int, alpha: float, C_a: float, treatment: str = 'new',
                      N_set: Optional[Sequence[int]] = None, tol: float = MATCH_TOLERANCE,
                      C_b: float = SCAN_C_B, periodic: bool = False) -> np.ndarray:
    """Eigenvalues common to the spectra of Q for every N in N_set"""
    N_set = tuple(N_set or default_n_set(d))
    if len(set(N_set)) < 3:
        raise ConfigError(f"need at least 3 distinct grid sizes, got {N_set}")
    spectra = [eigenvalues(assemble_Q(d, k_d, alpha, C_a, N, treatment, C_b, periodic).Q) for N in N_set]
    return _match(spectra[0], spectra[1:], tol)


# ---------------------------------------------------------------------------
# Scans
# ---------------------------------------------------------------------------

@dataclass
class StabilityScan:
    d: int
    k_d: int
    treatment: str
    lam: float
    table: pd.DataFrame
    fixed: Dict[Tuple[float, float], np.ndarray] = field(default_factory=dict)

    def stable_for_all(self) -> pd.Series:
        """alpha -> whether every C_a in the grid is stable"""
        return self.table.groupby('alpha', sort=True)['stable'].all()


def _scan_cell(d, k_d, treatment, C_a, alpha, lam, N_set):
    try:
        s = fixed_eigenvalues(d, k_d, alpha, C_a, treatment, N_set)
    except (NumericalError, np.linalg.LinAlgError) as e:
        logger.warning(f"scan cell C_a={C_a} alpha={alpha} failed: {e}")
        return (C_a, alpha, -1, float('nan'), False), np.array([], dtype=complex)
    z = amplification(s, lam) if len(s) else float('nan')
    stable = bool(len(s) == 0 or z <= 1.0 + Z_TOLERANCE)
    return (C_a, alpha, int(len(s)), z, stable), s


def scan_alpha(d: int, k_d: int, treatment: str = 'new', C_a_grid: Sequence[float] = DEFAULT_CA_GRID,
               alpha_grid: Sequence[float] = (1.0,), lam: Optional[float] = None,
               N_set: Optional[Sequence[int]] = None, threads: int = 1) -> StabilityScan:
    """Stability of every (C_a, alpha) cell; cells run as independent tasks"""
    lam = cauchy_cfl_max(d) if lam is None else lam
    N_set = tuple(N_set or default_n_set(d))
    cells = [(float(c), float(a)) for a in alpha_grid for c in C_a_grid]
    logger.info(f"Stability scan d={d} k_d={k_d} {treatment}: {len(cells)} cells, lambda={lam:.4f}, N={N_set}")

    rows, fixed = [], {}
    step = max(1, len(cells) // 10)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        futures = [pool.submit(_scan_cell, d, k_d, treatment, c, a, lam, N_set) for c, a in cells]
        for i, future in enumerate(futures, 1):
            row, s = future.result()
            rows.append(row)
            fixed[(row[0], row[1])] = s
            if i % step == 0:
                logger.info(f"scan progress {100 * i // len(cells)}%")

    table = pd.DataFrame(rows, columns=SCAN_COLUMNS)
    return StabilityScan(d, k_d, treatment, lam, table, fixed)


def stable_intervals(scan: StabilityScan) -> List[Tuple[float, float]]:
    """Maximal runs of consecutive grid alphas that are stable for every C_a"""
    flags = scan.stable_for_all()
    intervals, start, prev = [], None, None
    for alpha, ok in flags.items():
        if ok and start is None:
            start = alpha
        if not ok and start is not None:
            intervals.append((start, prev))
            start = None
        prev = alpha
    if start is not None:
        intervals.append((start, prev))
    return intervals


def amplification_map(d: int, k_d: int, treatment: str = 'new', C_a_grid: Sequence[float] = DEFAULT_CA_GRID,
                      alpha: float = 1.0, lam: Optional[float] = None, threads: int = 1) -> pd.DataFrame:
    """max|z| against C_a at one alpha"""
    scan = scan_alpha(d, k_d, treatment, C_a_grid, [alpha], lam, threads=threads)
    return scan.table[['C_a', 'max_abs_z', 'stable']].reset_index(drop=True)


# ---------------------------------------------------------------------------
# Time-domain verification
# ---------------------------------------------------------------------------

def _verify_run(d, k_d, alpha, C_a, N, t_end, lam, treatment, C_b, dx=None):
    from problems import get_problem
    from solver import run_case

    case = get_problem('linear-verify')
    if dx is not None:
        N = int(round((case.domain[1] - case.domain[0]) / dx - C_a - C_b))
    case = replace(case, C_a=C_a, C_b=C_b, t_end=t_end)
    config = SILWConfig(d, k_d, alpha, 'lagrange', treatment)
    control = StepControl(cfl=lam, order=3, law='fixed-ratio')
    return run_case(case, f"upwind{d}", config, N, step=control, track_error=True)


def verify_stability(d: int, k_d: int, alpha: float, C_a: float, N: int = 200, t_end: float = 30.0,
                     lam: Optional[float] = None, treatment: str = 'new', C_b: float = SCAN_C_B,
                     early_time: float = 1.0) -> Dict:
    """
    Run u_t + u_x = 0 with dt = lam dx and classify the outcome: unstable on blow-up
    or when the late error exceeds the early error by GROWTH_FACTOR.
    """
    lam = cauchy_cfl_max(d) if lam is None else lam
    outcome = {'d': d, 'k_d': k_d, 'alpha': alpha, 'C_a': C_a, 'N': N, 't_end': t_end, 'lambda': lam}
    try:
        result = _verify_run(d, k_d, alpha, C_a, N, t_end, lam, treatment, C_b)
    except BlowUpError as e:
        logger.info(f"d={d} alpha={alpha} C_a={C_a}: blow-up at step {e.step}")
        return outcome | {'status': 'unstable', 'reason': 'blow-up', 'step': e.step, 'time': e.time}

    history = np.array(result.error_history)
    early = history[history[:, 0] <= early_time, 2].max()
    late = history[history[:, 0] >= 0.5 * t_end, 2].max()
    grew = late > GROWTH_FACTOR * max(early, 1e-14)
    status = 'unstable' if grew else 'stable'
    logger.info(f"d={d} alpha={alpha} C_a={C_a}: {status} (early {early:.3g}, late {late:.3g})")
    return outcome | {'status': status, 'reason': 'error growth' if grew else '', 'step': result.steps,
                      'early_error': float(early), 'late_error': float(late), 'Linf': result.Linf}


def error_contour(d: int, k_d: int, C_a_grid: Sequence[float], alpha_grid: Sequence[float],
                  dx: float = 1.0 / 25, t_end: float = 2.0, treatment: str = 'new',
                  lam: Optional[float] = None, threads: int = 1) -> pd.DataFrame:
    """log10 of the final max error over a (C_a, alpha) grid, C_b = 1 - C_a so dx stays fixed"""
    lam = cauchy_cfl_max(d) if lam is None else lam

    def cell(C_a, alpha):
        try:
            result = _verify_run(d, k_d, alpha, C_a, None, t_end, lam, treatment, 1.0 - C_a, dx=dx)
            return (C_a, alpha, math.log10(max(result.Linf, 1e-300)))
        except BlowUpError:
            return (C_a, alpha, float('inf'))

    cells = [(float(c), float(a)) for a in alpha_grid for c in C_a_grid]
    for c, _ in cells:
        if not 0.0 < c < 1.0:
            raise ConfigError(f"error contour needs 0 < C_a < 1, got {c}")
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        rows = list(pool.map(lambda ca: cell(*ca), cells))
    return pd.DataFrame(rows, columns=['C_a', 'alpha', 'log10_error'])
