import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))


@pytest.fixture
def quadratic():
    """u(x) = 1 + 2x - 3x^2 with its derivatives"""
    def u(x, k=0):
        x = np.asarray(x, dtype=float)
        return [1 + 2 * x - 3 * x ** 2, 2 - 6 * x, np.full_like(x, -6.0)][k]
    return u


@pytest.fixture
def quartic():
    coefficients = np.array([0.5, -1.0, 0.25, 2.0, -0.75])

    def u(x, k=0):
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float),
                                                np.polynomial.polynomial.polyder(coefficients, k))
    return u


@pytest.fixture
def output_root(tmp_path, monkeypatch):
    """Point every default output location at a temporary directory"""
    import experiments
    import server
    monkeypatch.setenv('SILW_OUTPUT_DIR', str(tmp_path))
    monkeypatch.setattr(experiments, 'OUTPUT_ROOT', str(tmp_path))
    monkeypatch.setattr(server, 'OUTPUT_ROOT', str(tmp_path))
    return tmp_path
