#!/usr/bin/env python3
"""
Validation Report
Runs the reproduction checks and compares them with the published values
"""

import sys
import json
import time
import logging
import argparse
from datetime import datetime

import numpy as np

from reconstruction import SUPPORTED_ORDERS, upwind_residual
from stability import cauchy_cfl_max, amplification_map, scan_alpha, stable_intervals, verify_stability
from boundary import SILWConfig
from problems import get_problem
from solver import convergence_table
from timeint import StepControl

logger = logging.getLogger(__name__)

RESULTS_FILE = 'validation_results.json'

CAUCHY_EXPECTED = {3: 1.62, 5: 1.43, 7: 1.24, 9: 1.12, 11: 1.04, 13: 0.99}
CAUCHY_TOLERANCE = 0.01
SCAN_D3_MIN_ALPHA = 0.61
SCAN_D5_INTERVAL = (0.92, 5.11)


def check_stencils():
    """Each upwind operator is exact on x^k, k <= d"""
    h = 0.01
    worst = {}
    for d in SUPPORTED_ORDERS:
        g = (d + 1) // 2
        x = 0.3 + h * np.arange(-g, 20 + g)
        errors = []
        for k in range(d + 1):
            derivative = -upwind_residual(d, x ** k, h)
            exact = k * x[g:-g] ** (k - 1) if k else np.zeros(20)
            errors.append(np.max(np.abs(derivative - exact)) / max(1.0, np.max(np.abs(exact))))
        worst[d] = float(max(errors))
    return {'passed': all(e <= 1e-9 for e in worst.values()), 'max_relative_error': worst}


def check_cauchy_cfl():
    measured = {d: round(cauchy_cfl_max(d), 4) for d in CAUCHY_EXPECTED}
    passed = all(abs(measured[d] - v) <= CAUCHY_TOLERANCE for d, v in CAUCHY_EXPECTED.items())
    return {'passed': passed, 'measured': measured, 'expected': CAUCHY_EXPECTED}


def check_scan_d3(threads):
    scan = scan_alpha(3, 2, 'new', alpha_grid=[0.59, 0.60, 0.61, 0.62, 0.63], threads=threads)
    intervals = stable_intervals(scan)
    lo = intervals[0][0] if intervals else None
    return {'passed': lo is not None and abs(lo - SCAN_D3_MIN_ALPHA) < 1e-9,
            'min_stable_alpha': lo, 'expected': SCAN_D3_MIN_ALPHA}


def check_dichotomy(threads):
    """Some small C_a is unstable at alpha = 0.60 while alpha = 0.61 is stable everywhere"""
    small = [1e-6] + [round(0.005 * k, 3) for k in range(1, 11)]
    below = amplification_map(3, 2, 'new', small, alpha=0.60, threads=threads)
    at = amplification_map(3, 2, 'new', alpha=0.61, threads=threads)
    return {'passed': bool((~below['stable']).any() and at['stable'].all()),
            'max_abs_z_at_0.60': float(below['max_abs_z'].max()),
            'max_abs_z_at_0.61': float(at['max_abs_z'].max())}


def check_scan_d5(threads):
    lo, hi = SCAN_D5_INTERVAL
    expected = {round(lo - 0.01, 2): False, lo: True, 1.0: True, hi: True, round(hi + 0.01, 2): False}
    scan = scan_alpha(5, 2, 'new', alpha_grid=sorted(expected), threads=threads)
    verdict = scan.stable_for_all()
    return {'passed': all(bool(verdict[a]) == ok for a, ok in expected.items()),
            'verdict': {str(a): bool(v) for a, v in verdict.items()}}


def check_verification():
    blown = verify_stability(5, 2, 0.91, 0.38)
    held = verify_stability(5, 2, 1.00, 0.38)
    return {'passed': blown['status'] == 'unstable' and held['status'] == 'stable',
            'alpha_0.91': blown['status'], 'alpha_1.00': held['status']}


def check_example1(d, resolutions):
    case = get_problem('example1')
    scheme = f"weno{d}"
    table = convergence_table(case, scheme, SILWConfig(d, 2), resolutions, StepControl(order=d))
    order = float(table['L1_order'].iloc[-1])
    return {'passed': abs(order - d) <= 0.3, 'final_L1_order': order,
            'final_L1': float(table['L1'].iloc[-1]), 'resolutions': list(resolutions)}


CHECKS = [
    ('Upwind stencil exactness', lambda args: check_stencils(), False),
    ('Cauchy CFL limits', lambda args: check_cauchy_cfl(), False),
    ('d=3 minimal stable alpha', lambda args: check_scan_d3(args.threads), False),
    ('d=3 alpha 0.60/0.61 dichotomy', lambda args: check_dichotomy(args.threads), False),
    ('d=5 stable alpha interval', lambda args: check_scan_d5(args.threads), True),
    ('d=5 time-domain verification', lambda args: check_verification(), True),
    ('Example 1 convergence, d=3', lambda args: check_example1(3, (40, 80, 160)), False),
    ('Example 1 convergence, d=5', lambda args: check_example1(5, (40, 80, 160)), True),
]


def main():
    parser = argparse.ArgumentParser(description='Reproduction checks')
    parser.add_argument('--full', action='store_true', help='include the slow checks')
    parser.add_argument('--threads', type=int, default=1)
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO)

    print("=" * 100)
    print("SILW VALIDATION REPORT")
    print("=" * 100)
    print(f"Generated: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
    print()

    results = {}
    for name, check, slow in CHECKS:
        if slow and not args.full:
            results[name] = {'skipped': True}
            print(f"  SKIP  {name}")
            continue
        started = time.time()
        try:
            outcome = check(args)
        except Exception as e:
            logger.error(f"{name} raised {type(e).__name__}: {e}")
            outcome = {'passed': False, 'error': str(e)}
        outcome['seconds'] = round(time.time() - started, 2)
        results[name] = outcome
        print(f"  {'PASS' if outcome['passed'] else 'FAIL'}  {name} ({outcome['seconds']}s)")

    ran = [r for r in results.values() if not r.get('skipped')]
    passed = sum(1 for r in ran if r['passed'])
    print("\n" + "=" * 100)
    print(f"Passed {passed}/{len(ran)} checks")
    print("=" * 100)

    with open(RESULTS_FILE, 'w') as f:
        json.dump({'generated': datetime.now().isoformat(), 'results': results}, f, indent=2, default=str)
    print(f"\nResults saved to {RESULTS_FILE}")
    return 0 if passed == len(ran) else 1


if __name__ == '__main__':
    sys.exit(main())
