#!/usr/bin/env python3
"""
Experiment runner: turns a RunConfig into CSV tables, field snapshots and a
run manifest under the output directory.
"""

import os
import json
import time
import uuid
import logging
import platform
from dataclasses import asdict, replace
from importlib import metadata
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from errors import EXIT_OK, SILWError, exit_code_for
from boundary import SILWConfig
from timeint import StepControl
from run_config import RunConfig
from problems import get_problem
from solver import FLOAT_FORMAT, convergence_table, run_case, write_field
from stability import DEFAULT_CA_GRID, error_contour, scan_alpha, stable_intervals, verify_stability

logger = logging.getLogger(__name__)

OUTPUT_ROOT = os.environ.get('SILW_OUTPUT_DIR', 'output')
MANIFEST_NAME = 'manifest.json'
TRACKED_PACKAGES = ('numpy', 'scipy', 'sympy', 'pandas', 'flask')
WENO_ORDERS = (3, 5)


def generate_run_id() -> str:
    return str(uuid.uuid4())[:8]


def library_versions() -> Dict[str, str]:
    versions = {'python': platform.python_version()}
    for name in TRACKED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = 'not installed'
    return versions


def output_dir(config: RunConfig, out: Optional[str] = None) -> Path:
    """--out beats the config's output key, which beats SILW_OUTPUT_DIR/<kind>-<case>"""
    if out is None:
        out = config.output or os.path.join(OUTPUT_ROOT, f"{config.kind}-{config.case or 'linear'}-d{config.d}")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def choose_scheme(config: RunConfig, case) -> str:
    """WENO for nonlinear equations where available, linear upwind otherwise"""
    if config.scheme != 'auto':
        return config.scheme
    if getattr(case.equation, 'linear', False) or config.d not in WENO_ORDERS:
        return f"upwind{config.d}"
    return f"weno{config.d}"


def _case_for(config: RunConfig):
    case = get_problem(config.case)
    overrides = {}
    if config.C_a is not None:
        overrides['C_a'] = config.C_a
    if config.C_b is not None:
        overrides['C_b'] = config.C_b
    if config.t_end is not None:
        overrides['t_end'] = config.t_end
    return replace(case, **overrides) if overrides else case


def _silw_for(config: RunConfig, case) -> SILWConfig:
    mode = case.extrapolation_mode if config.extrapolation == 'auto' else config.extrapolation
    return SILWConfig(config.d, config.k_d, config.alpha, mode, config.treatment)


def _step_for(config: RunConfig, order: int) -> StepControl:
    if config.lam is not None:
        return StepControl(cfl=config.lam, order=3, law='fixed-ratio')
    return StepControl(cfl=config.cfl, order=order)


def _write_table(table: pd.DataFrame, path: Path, artifacts: List[str]) -> None:
    table.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    artifacts.append(path.name)
    logger.info(f"wrote {path}")


def _snapshot(result, directory: Path, stem: str, artifacts: List[str]) -> None:
    path = directory / f"{stem}_{result.resolution}.dat"
    write_field(result, path)
    artifacts.append(path.name)


def _accuracy(config: RunConfig, directory: Path, threads: int, artifacts: List[str]) -> Dict:
    case = _case_for(config)
    scheme = choose_scheme(config, case)
    silw = _silw_for(config, case)
    resolutions = config.resolutions or case.resolutions
    stem = f"{case.name}_d{config.d}"
    finest = max(resolutions)

    def keep(result):
        if result.resolution == finest:
            _snapshot(result, directory, stem, artifacts)

    table = convergence_table(case, scheme, silw, resolutions, _step_for(config, config.d), threads, keep)
    _write_table(table, directory / f"{stem}_convergence.csv", artifacts)
    last = table.iloc[-1]
    return {'status': 'completed', 'scheme': scheme, 'final_L1': float(last['L1']),
            'final_L1_order': float(last['L1_order']), 'final_Linf_order': float(last['Linf_order'])}


def _benchmark_summary(case, result) -> Dict:
    values = result.interior_values()
    summary = {'finite': bool(np.all(np.isfinite(values))), 'steps': result.steps, 't': result.t}
    if case.equation.is_system:
        prims = case.equation.primitives(values)
        rho, p = prims[0], prims[-1]
        summary.update(min_density=float(rho.min()), min_pressure=float(p.min()), max_pressure=float(p.max()))
        if case.reference_state is not None:
            p_ref = case.equation.primitives(np.asarray(case.reference_state, dtype=float).reshape(-1, 1))[-1]
            summary['max_pressure_ratio'] = float(p.max() / float(np.ravel(p_ref)[0]))
    if result.L1 is not None:
        summary.update(L1=result.L1, Linf=result.Linf)
    return summary


def _benchmark(config: RunConfig, directory: Path, threads: int, artifacts: List[str]) -> Dict:
    case = _case_for(config)
    scheme = choose_scheme(config, case)
    silw = _silw_for(config, case)
    runs = {}
    for resolution in config.resolutions or case.resolutions:
        result = run_case(case, scheme, silw, resolution, _step_for(config, 3))
        _snapshot(result, directory, f"{case.name}_d{config.d}", artifacts)
        runs[str(resolution)] = _benchmark_summary(case, result)
    ok = all(r['finite'] for r in runs.values())
    return {'status': 'completed' if ok else 'failed', 'scheme': scheme, 'runs': runs}


def _stability_scan(config: RunConfig, directory: Path, threads: int, artifacts: List[str]) -> Dict:
    scan = scan_alpha(config.d, config.k_d, config.treatment, config.C_a_grid or DEFAULT_CA_GRID,
                      config.alpha_grid, config.lam, threads=threads)
    stem = f"scan_d{config.d}_kd{config.k_d}_{config.treatment}"
    _write_table(scan.table, directory / f"{stem}.csv", artifacts)
    summary = scan.stable_for_all().rename('stable_for_all_C_a').reset_index()
    _write_table(summary, directory / f"{stem}_alpha.csv", artifacts)
    intervals = stable_intervals(scan)
    logger.info(f"stable alpha intervals: {intervals}")
    return {'status': 'completed', 'lambda': scan.lam,
            'stable_intervals': [[float(a), float(b)] for a, b in intervals],
            'min_stable_alpha': float(intervals[0][0]) if intervals else None}


def _stability_verify(config: RunConfig, directory: Path, threads: int, artifacts: List[str]) -> Dict:
    C_a_values: Tuple[float, ...] = config.C_a_grid or (config.C_a,)
    C_b = config.C_b if config.C_b is not None else 0.5
    rows = [verify_stability(config.d, config.k_d, config.alpha, C_a, config.N,
                             config.t_end if config.t_end is not None else 30.0,
                             config.lam, config.treatment, C_b)
            for C_a in C_a_values]
    table = pd.DataFrame(rows)
    _write_table(table, directory / f"verify_d{config.d}_alpha{config.alpha:g}.csv", artifacts)
    unstable = [r['C_a'] for r in rows if r['status'] == 'unstable']
    return {'status': 'completed', 'result': 'unstable' if unstable else 'stable', 'unstable_C_a': unstable}


def _error_contour(config: RunConfig, directory: Path, threads: int, artifacts: List[str]) -> Dict:
    table = error_contour(config.d, config.k_d, config.C_a_grid, config.alpha_grid,
                          t_end=config.t_end if config.t_end is not None else 2.0,
                          treatment=config.treatment, lam=config.lam, threads=threads)
    _write_table(table, directory / f"contour_d{config.d}_kd{config.k_d}.csv", artifacts)
    finite = table['log10_error'].replace(np.inf, np.nan).dropna()
    return {'status': 'completed', 'blow_ups': int(np.isinf(table['log10_error']).sum()),
            'best_log10_error': float(finite.min()) if len(finite) else None}


RUNNERS = {
    'accuracy': _accuracy,
    'benchmark': _benchmark,
    'stability-scan': _stability_scan,
    'stability-verify': _stability_verify,
    'error-contour': _error_contour,
}


def run_experiment(config: RunConfig, out: Optional[str] = None, threads: int = 1) -> Tuple[int, Dict]:
    """
    Execute one experiment and write its manifest.
    Returns (exit code, manifest); solver errors become a failed manifest and a nonzero code.
    """
    run_id = generate_run_id()
    directory = output_dir(config, out)
    artifacts: List[str] = []
    started = time.time()
    logger.info(f"[{run_id}] {config.kind} {config.case or ''} d={config.d} -> {directory}")

    manifest = {
        'run_id': run_id,
        'parameters': asdict(config),
        'output_dir': str(directory),
        'versions': library_versions(),
    }
    code = EXIT_OK
    try:
        manifest.update(RUNNERS[config.kind](config, directory, threads, artifacts))
    except SILWError as e:
        code = exit_code_for(e)
        logger.error(f"[{run_id}] {type(e).__name__}: {e}")
        manifest.update(status='failed', error=str(e), error_type=type(e).__name__)

    manifest['wall_clock'] = round(time.time() - started, 3)
    manifest['artifacts'] = artifacts
    with open(directory / MANIFEST_NAME, 'w', encoding='utf-8') as f:
        json.dump(manifest, f, indent=2, default=str)
    logger.info(f"[{run_id}] {manifest['status']} in {manifest['wall_clock']}s, {len(artifacts)} artifacts")
    return code, manifest
