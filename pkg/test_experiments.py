import json

import pandas as pd

from errors import EXIT_CONFIG, EXIT_OK
from experiments import MANIFEST_NAME, choose_scheme, output_dir, run_experiment
from problems import get_problem
from run_config import parse_config

HEADER = "[experiment]\nkind = {kind}\n{case}[scheme]\nd = {d}\n[closure]\nk_d = {k_d}\n"


def _config(kind, d=3, k_d=2, case=None, body=''):
    case_line = f"case = {case}\n" if case else ''
    return parse_config(HEADER.format(kind=kind, case=case_line, d=d, k_d=k_d) + body)


def _manifest(directory):
    with open(directory / MANIFEST_NAME, encoding='utf-8') as f:
        return json.load(f)


def test_scheme_choice_follows_the_equation():
    linear = _config('benchmark', case='linear-verify')
    euler = _config('benchmark', d=5, case='example1')
    assert choose_scheme(linear, get_problem('linear-verify')) == 'upwind3'
    assert choose_scheme(euler, get_problem('example1')) == 'weno5'
    assert choose_scheme(_config('benchmark', d=7, case='example1'), get_problem('example1')) == 'upwind7'


def test_default_output_dir_lives_under_the_output_root(output_root):
    config = _config('stability-scan', body="[stability]\nalpha_grid = 1.0\n")
    path = output_dir(config)
    assert path == output_root / 'stability-scan-linear-d3'
    assert path.exists()


def test_out_argument_overrides_the_default(tmp_path):
    config = _config('stability-scan', body="[stability]\nalpha_grid = 1.0\n")
    assert output_dir(config, str(tmp_path / 'elsewhere')) == tmp_path / 'elsewhere'


def test_stability_scan_writes_tables_and_manifest(tmp_path):
    config = _config('stability-scan', body="[stability]\nalpha_grid = 1.0\nC_a_grid = 0.2, 0.8\n")
    code, manifest = run_experiment(config, out=str(tmp_path))
    assert code == EXIT_OK
    assert manifest['status'] == 'completed'
    assert manifest['stable_intervals'] == [[1.0, 1.0]]
    table = pd.read_csv(tmp_path / 'scan_d3_kd2_new.csv')
    assert list(table['C_a']) == [0.2, 0.8]
    saved = _manifest(tmp_path)
    assert saved['run_id'] == manifest['run_id']
    assert set(saved['artifacts']) == {'scan_d3_kd2_new.csv', 'scan_d3_kd2_new_alpha.csv'}
    assert 'numpy' in saved['versions']


def test_stability_verify_records_a_result(tmp_path):
    config = _config('stability-verify', body="alpha = 1.0\n[domain]\nC_a = 0.5\nN = 40\nt_end = 2.0\n")
    code, manifest = run_experiment(config, out=str(tmp_path))
    assert code == EXIT_OK
    assert manifest['result'] == 'stable'
    assert (tmp_path / 'verify_d3_alpha1.csv').exists()


def test_error_contour_writes_a_table(tmp_path):
    config = _config('error-contour', body="[domain]\nt_end = 0.1\n[stability]\nC_a_grid = 0.5\nalpha_grid = 1.0\n")
    code, manifest = run_experiment(config, out=str(tmp_path))
    assert code == EXIT_OK
    assert manifest['blow_ups'] == 0
    assert (tmp_path / 'contour_d3_kd2.csv').exists()


def test_accuracy_run(tmp_path):
    config = _config('accuracy', case='linear-verify', body="[domain]\nresolutions = 20, 40\nt_end = 0.2\n")
    code, manifest = run_experiment(config, out=str(tmp_path))
    assert code == EXIT_OK
    assert manifest['scheme'] == 'upwind3'
    assert 'linear-verify_d3_convergence.csv' in manifest['artifacts']
    assert 'linear-verify_d3_40.dat' in manifest['artifacts']
    assert manifest['final_L1'] < 1e-2


def test_solver_errors_become_a_failed_manifest(tmp_path):
    # the Euler closures stop at k_d = 2
    config = _config('benchmark', d=5, k_d=3, case='uniform-wall')
    code, manifest = run_experiment(config, out=str(tmp_path))
    assert code == EXIT_CONFIG
    assert manifest['status'] == 'failed'
    assert manifest['error_type'] == 'ConfigError'
    assert _manifest(tmp_path)['status'] == 'failed'
