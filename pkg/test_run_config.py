from pathlib import Path

import pytest

from errors import ConfigError
from run_config import DEFAULT_ALPHA_2D, emit_config, load_config, parse_config, parse_float_list

CONFIGS = Path(__file__).parent / 'configs'

SCAN = """
[experiment]
kind = stability-scan   # eigenvalue scan

[scheme]
d = 3

[closure]
k_d = 2
treatment = new-silw

[stability]
alpha_grid = 0.5:0.6:0.05
"""


def test_parse_scan_config():
    config = parse_config(SCAN)
    assert config.kind == 'stability-scan'
    assert config.d == 3
    assert config.k_d == 2
    assert config.treatment == 'new'
    assert config.alpha_grid == (0.5, 0.55, 0.6)
    assert config.alpha == 1.0


def test_float_list_mixes_values_and_ranges():
    assert parse_float_list('0.1, 0.2:0.4:0.1, 1') == (0.1, 0.2, 0.3, 0.4, 1.0)
    with pytest.raises(ValueError):
        parse_float_list('0:1:0')


def test_two_dimensional_cases_default_alpha():
    config = parse_config("[experiment]\nkind = accuracy\ncase = example4\n[scheme]\nd = 3\n"
                          "[closure]\nk_d = 2\n[domain]\nresolutions = 16, 32\n")
    assert config.alpha == DEFAULT_ALPHA_2D


@pytest.mark.parametrize("path", sorted(CONFIGS.glob('*.cfg')), ids=lambda p: p.name)
def test_shipped_configs_survive_emit(path):
    config = load_config(path)
    assert parse_config(emit_config(config)) == config


def test_issues_carry_line_numbers():
    text = "[experiment]\nkind = accuracy\ncase = example1\n[scheme]\nd = 5\n[closure]\nk_d = 2\n" \
           "[domain]\nC_a = 1.2\nresolutions = 20, 40\n"
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert [line for line, _ in info.value.issues] == [9]
    assert 'C_a' in info.value.issues[0][1]


def test_empty_file_lists_required_keys():
    with pytest.raises(ConfigError) as info:
        parse_config('')
    assert info.value.issues == [(0, 'missing required keys: kind, d, k_d')]


def test_structural_problems_are_all_reported():
    text = "[experiment]\nkind = stability-scan\nkind = accuracy\n[scheme]\nd = 3\nk_d = 2\nwidth = 4\n[extras]\n"
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    lines = [line for line, _ in info.value.issues]
    assert lines == [3, 6, 7, 8, 0]


def test_unknown_case_points_at_its_line():
    with pytest.raises(ConfigError) as info:
        parse_config("[experiment]\nkind = benchmark\ncase = nowhere\n[scheme]\nd = 3\n[closure]\nk_d = 2\n")
    assert info.value.issues[0][0] == 3


@pytest.mark.parametrize("body, key", [
    ("[scheme]\nd = 4\n[closure]\nk_d = 2\n", 'd'),
    ("[scheme]\nd = 3\n[closure]\nk_d = 4\n", 'k_d'),
    ("[scheme]\nd = 3\nscheme = weno9\n[closure]\nk_d = 2\n", 'scheme'),
    ("[scheme]\nd = 3\n[closure]\nk_d = 2\nalpha = -1\n", 'alpha'),
])
def test_value_checks(body, key):
    text = "[experiment]\nkind = stability-scan\n" + body + "[stability]\nalpha_grid = 1.0\n"
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert any(key in message for _, message in info.value.issues)


def test_accuracy_needs_two_resolutions():
    text = "[experiment]\nkind = accuracy\ncase = example1\n[scheme]\nd = 3\n[closure]\nk_d = 2\n" \
           "[domain]\nresolutions = 40\n"
    with pytest.raises(ConfigError, match='two resolutions'):
        parse_config(text)
