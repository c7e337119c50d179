#!/usr/bin/env python3
"""
Command-line front-end.

    silw run <config> [--out DIR] [--threads K]
    silw scan --d 3 --k-d 2 --alpha 0.5:1.2:0.01
    silw verify --d 5 --k-d 2 --alpha 0.91 --C-a 0.38
    silw contour --d 3 --k-d 2 --C-a 0.05:0.95:0.05 --alpha 0.4:1.6:0.05
    silw cfl
"""

import sys
import logging
import argparse
from typing import List, Optional

from errors import EXIT_OK, ConfigError, SILWError, exit_code_for
from run_config import emit_config, load_config, parse_config
from stability import cauchy_table

logger = logging.getLogger(__name__)


def _synthesized(kind: str, args, extra: List[str]) -> str:
    """Config text for the shorthand subcommands"""
    lines = ['[experiment]', f"kind = {kind}", '[scheme]', f"d = {args.d}"]
    if args.lam is not None:
        lines.append(f"lambda = {args.lam}")
    lines += ['[closure]', f"k_d = {args.k_d}", f"treatment = {args.treatment}"]
    lines += extra
    return '\n'.join(lines) + '\n'


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='silw', description='Simplified inverse Lax-Wendroff boundary experiments')
    parser.add_argument('--verbose', '-v', action='store_true', help='debug logging')
    sub = parser.add_subparsers(dest='command', required=True)

    run = sub.add_parser('run', help='run an experiment config')
    run.add_argument('config')

    def closure_flags(p):
        p.add_argument('--d', type=int, required=True)
        p.add_argument('--k-d', dest='k_d', type=int, required=True)
        p.add_argument('--treatment', default='new', choices=['new', 'original'])
        p.add_argument('--lambda', dest='lam', type=float, default=None, help='dt/dx, defaults to the Cauchy maximum')

    scan = sub.add_parser('scan', help='eigenvalue stability scan over alpha')
    closure_flags(scan)
    scan.add_argument('--alpha', required=True, help='list or start:stop:step')
    scan.add_argument('--C-a', dest='C_a', default=None, help='C_a grid, defaults to 0..1 in steps of 0.01')

    verify = sub.add_parser('verify', help='time-domain stability verification')
    closure_flags(verify)
    verify.add_argument('--alpha', type=float, required=True)
    verify.add_argument('--C-a', dest='C_a', required=True, help='one value or a list')
    verify.add_argument('--N', type=int, default=200)
    verify.add_argument('--t-end', dest='t_end', type=float, default=30.0)

    contour = sub.add_parser('contour', help='error contour over (C_a, alpha)')
    closure_flags(contour)
    contour.add_argument('--alpha', required=True)
    contour.add_argument('--C-a', dest='C_a', required=True)
    contour.add_argument('--t-end', dest='t_end', type=float, default=2.0)

    sub.add_parser('cfl', help='print the Cauchy CFL limits of the upwind schemes')

    for p in (run, scan, verify, contour):
        p.add_argument('--out', default=None, help='output directory')
        p.add_argument('--threads', type=int, default=1)
    return parser


def config_from_args(args):
    if args.command == 'run':
        return load_config(args.config)
    if args.command == 'scan':
        extra = ['[stability]', f"alpha_grid = {args.alpha}"]
        if args.C_a:
            extra.append(f"C_a_grid = {args.C_a}")
        return parse_config(_synthesized('stability-scan', args, extra))
    if args.command == 'verify':
        extra = [f"alpha = {args.alpha}", '[domain]', f"N = {args.N}", f"t_end = {args.t_end}"]
        key = 'C_a_grid' if (',' in args.C_a or ':' in args.C_a) else 'C_a'
        if key == 'C_a':
            extra.append(f"C_a = {args.C_a}")
        else:
            extra += ['[stability]', f"C_a_grid = {args.C_a}"]
        return parse_config(_synthesized('stability-verify', args, extra))
    extra = ['[domain]', f"t_end = {args.t_end}", '[stability]', f"C_a_grid = {args.C_a}", f"alpha_grid = {args.alpha}"]
    return parse_config(_synthesized('error-contour', args, extra))


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')

    if args.command == 'cfl':
        print(cauchy_table().to_string(index=False))
        return EXIT_OK

    try:
        config = config_from_args(args)
    except ConfigError as e:
        logger.error(f"config error: {e}")
        for line, message in e.issues:
            print(f"  line {line}: {message}" if line else f"  {message}", file=sys.stderr)
        return exit_code_for(e)
    except OSError as e:
        logger.error(f"cannot read config: {e}")
        return exit_code_for(ConfigError(str(e)))
    logger.debug(f"effective config:\n{emit_config(config)}")

    from experiments import run_experiment
    try:
        code, manifest = run_experiment(config, out=args.out, threads=args.threads)
    except SILWError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return exit_code_for(e)
    print(f"{manifest['status']}: {manifest['output_dir']}")
    return code


if __name__ == '__main__':
    sys.exit(main())
