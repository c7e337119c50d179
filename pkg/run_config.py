#!/usr/bin/env python3
"""
Experiment configuration files.

A config is bracketed sections of `key = value` lines; `#` starts a comment.
Lists are comma separated and `start:stop:step` expands to an inclusive range.

    [experiment]
    kind = accuracy
    case = example1

    [scheme]
    d = 5

    [closure]
    k_d = 2
    alpha = 1.0
"""

import logging
from dataclasses import dataclass, fields
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from errors import ConfigError
from boundary import EXTRAPOLATION_MODES
from reconstruction import SCHEMES, SUPPORTED_ORDERS

logger = logging.getLogger(__name__)

KINDS = ('accuracy', 'stability-scan', 'stability-verify', 'benchmark', 'error-contour')
STABILITY_KINDS = ('stability-scan', 'stability-verify', 'error-contour')
TREATMENT_ALIASES = {'new': 'new', 'new-silw': 'new', 'original': 'original', 'original-silw': 'original'}

DEFAULT_CFL = 0.6
DEFAULT_ALPHA_1D = 1.0
DEFAULT_ALPHA_2D = 1.25
REQUIRED_KEYS = ('kind', 'd', 'k_d')


@dataclass(frozen=True)
class RunConfig:
    kind: str
    d: int
    k_d: int
    case: Optional[str] = None
    treatment: str = 'new'
    alpha: float = DEFAULT_ALPHA_1D
    extrapolation: str = 'auto'
    scheme: str = 'auto'
    cfl: float = DEFAULT_CFL
    C_a: Optional[float] = None
    C_b: Optional[float] = None
    resolutions: Tuple[int, ...] = ()
    t_end: Optional[float] = None
    C_a_grid: Tuple[float, ...] = ()
    alpha_grid: Tuple[float, ...] = ()
    N: int = 200
    lam: Optional[float] = None
    output: Optional[str] = None


def _float(text: str) -> float:
    return float(text)


def _int(text: str) -> int:
    value = float(text)
    if value != int(value):
        raise ValueError(f"{text!r} is not an integer")
    return int(value)


def _text(text: str) -> str:
    if not text:
        raise ValueError("empty value")
    return text


def parse_float_list(text: str) -> Tuple[float, ...]:
    values: List[float] = []
    for item in text.split(','):
        item = item.strip()
        if not item:
            continue
        if ':' in item:
            start, stop, step = (float(p) for p in item.split(':'))
            if step <= 0:
                raise ValueError(f"range step must be positive in {item!r}")
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            values.extend(round(start + k * step, 12) for k in range(count))
        else:
            values.append(float(item))
    if not values:
        raise ValueError("empty list")
    return tuple(values)


def _int_list(text: str) -> Tuple[int, ...]:
    return tuple(_int(repr(v)) for v in parse_float_list(text))


# key -> (section, parser, field name)
KEYS: Dict[str, Tuple[str, Callable[[str], Any], str]] = {
    'kind': ('experiment', _text, 'kind'),
    'case': ('experiment', _text, 'case'),
    'output': ('experiment', _text, 'output'),
    'd': ('scheme', _int, 'd'),
    'scheme': ('scheme', _text, 'scheme'),
    'cfl': ('scheme', _float, 'cfl'),
    'lambda': ('scheme', _float, 'lam'),
    'treatment': ('closure', _text, 'treatment'),
    'k_d': ('closure', _int, 'k_d'),
    'alpha': ('closure', _float, 'alpha'),
    'extrapolation': ('closure', _text, 'extrapolation'),
    'C_a': ('domain', _float, 'C_a'),
    'C_b': ('domain', _float, 'C_b'),
    'resolutions': ('domain', _int_list, 'resolutions'),
    't_end': ('domain', _float, 't_end'),
    'N': ('domain', _int, 'N'),
    'C_a_grid': ('stability', parse_float_list, 'C_a_grid'),
    'alpha_grid': ('stability', parse_float_list, 'alpha_grid'),
}
SECTIONS = ('experiment', 'scheme', 'closure', 'domain', 'stability')


def _case_dim(name: Optional[str]) -> int:
    if name is None:
        return 1
    from problems import get_problem
    return get_problem(name).dim


def _validate(values: Dict[str, Any], lines: Dict[str, int]) -> List[Tuple[int, str]]:
    issues: List[Tuple[int, str]] = []

    def bad(key: str, message: str):
        issues.append((lines.get(key, 0), message))

    kind = values.get('kind')
    if kind not in KINDS:
        bad('kind', f"kind {kind!r} not in {KINDS}")
    if values.get('d') not in SUPPORTED_ORDERS:
        bad('d', f"d={values.get('d')} not in {SUPPORTED_ORDERS}")
    elif not 1 <= values.get('k_d', 0) <= values['d']:
        bad('k_d', f"k_d={values.get('k_d')} outside [1, {values['d']}]")
    if values.get('treatment', 'new') not in TREATMENT_ALIASES:
        bad('treatment', f"treatment {values['treatment']!r} not in {sorted(TREATMENT_ALIASES)}")
    mode = values.get('extrapolation', 'auto')
    if mode != 'auto' and mode not in EXTRAPOLATION_MODES:
        bad('extrapolation', f"extrapolation {mode!r} not in {('auto',) + EXTRAPOLATION_MODES}")
    scheme = values.get('scheme', 'auto')
    if scheme != 'auto' and scheme not in SCHEMES:
        bad('scheme', f"scheme {scheme!r} not in {('auto',) + SCHEMES}")
    for key in ('C_a', 'C_b'):
        if key in values and not 0.0 <= values[key] < 1.0:
            bad(key, f"{key}={values[key]} outside [0, 1)")
    for key in ('alpha', 'cfl', 't_end', 'lambda'):
        if key in values and not values[key] > 0:
            bad(key, f"{key} must be positive, got {values[key]}")
    if any(n <= 0 for n in values.get('resolutions', ())):
        bad('resolutions', "resolutions must be positive")
    if any(not 0.0 <= c <= 1.0 for c in values.get('C_a_grid', ())):
        bad('C_a_grid', "C_a_grid values must lie in [0, 1]")
    if any(a <= 0 for a in values.get('alpha_grid', ())):
        bad('alpha_grid', "alpha_grid values must be positive")
    if values.get('N', 200) < 4 * values.get('d', 0):
        bad('N', f"N={values.get('N')} below 4d")

    if kind in ('accuracy', 'benchmark'):
        if 'case' not in values:
            bad('kind', f"{kind} needs a case")
        if kind == 'accuracy' and len(values.get('resolutions', (0, 0))) < 2:
            bad('resolutions', "accuracy needs at least two resolutions")
    if kind == 'stability-scan' and 'alpha_grid' not in values:
        bad('kind', "stability-scan needs alpha_grid")
    if kind == 'error-contour':
        if 'alpha_grid' not in values or 'C_a_grid' not in values:
            bad('kind', "error-contour needs C_a_grid and alpha_grid")
        elif any(not 0.0 < c < 1.0 for c in values['C_a_grid']):
            bad('C_a_grid', "error-contour needs 0 < C_a < 1")
    if kind == 'stability-verify' and 'C_a' not in values and 'C_a_grid' not in values:
        bad('kind', "stability-verify needs C_a or C_a_grid")
    return issues


def parse_config(text: str) -> RunConfig:
    """Parse and validate a config; every problem is reported with its line number"""
    issues: List[Tuple[int, str]] = []
    values: Dict[str, Any] = {}
    lines: Dict[str, int] = {}
    section = None
    seen = set()

    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if line.startswith('[') and line.endswith(']'):
            section = line[1:-1].strip()
            if section not in SECTIONS:
                issues.append((number, f"unknown section [{section}]"))
            continue
        if '=' not in line:
            issues.append((number, f"expected key = value, got {line!r}"))
            continue
        key, value = (part.strip() for part in line.split('=', 1))
        if key not in KEYS:
            issues.append((number, f"unknown key {key!r}"))
            continue
        expected, convert, _ = KEYS[key]
        if section != expected:
            issues.append((number, f"key {key!r} belongs in [{expected}]"))
            continue
        if key in seen:
            issues.append((number, f"duplicate key {key!r} (first on line {lines[key]})"))
            continue
        seen.add(key)
        lines[key] = number
        try:
            values[key] = convert(value)
        except ValueError as e:
            issues.append((number, f"bad value for {key}: {e}"))

    missing = [k for k in REQUIRED_KEYS if k not in seen]
    if missing:
        issues.append((0, f"missing required keys: {', '.join(missing)}"))
    if issues:
        raise ConfigError("invalid run config", issues)

    if 'case' in values:
        try:
            dim = _case_dim(values['case'])
        except ConfigError as e:
            raise ConfigError("invalid run config", [(lines['case'], str(e))])
    else:
        dim = 1
    issues = _validate(values, lines)
    if issues:
        raise ConfigError("invalid run config", issues)

    values.setdefault('alpha', DEFAULT_ALPHA_1D if dim == 1 else DEFAULT_ALPHA_2D)
    values['treatment'] = TREATMENT_ALIASES[values.get('treatment', 'new')]
    kwargs = {KEYS[k][2]: v for k, v in values.items()}
    config = RunConfig(**kwargs)
    logger.debug(f"parsed config {config}")
    return config


def _format(value: Any) -> str:
    if isinstance(value, tuple):
        return ', '.join(_format(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_config(config: RunConfig) -> str:
    """Canonical text form; parse_config(emit_config(c)) == c"""
    by_field = {name: key for key, (_, _, name) in KEYS.items()}
    defaults = {f.name: f.default for f in fields(RunConfig)}
    out: List[str] = []
    for section in SECTIONS:
        body = []
        for key, (sec, _, name) in KEYS.items():
            if sec != section:
                continue
            value = getattr(config, name)
            if value is None or value == ():
                continue
            if name not in REQUIRED_KEYS and name != 'alpha' and value == defaults[name]:
                continue
            body.append(f"{by_field[name]} = {_format(value)}")
        if body:
            out.append(f"[{section}]")
            out.extend(body)
            out.append('')
    return '\n'.join(out)


def load_config(path) -> RunConfig:
    with open(path, 'r', encoding='utf-8') as f:
        return parse_config(f.read())
