import os
import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT))
os.environ.setdefault("MULTIPOLY_FILE_LOG", "0")
os.environ.setdefault("MULTIPOLY_THREADS", "2")

from core.mpcore import CoefficientKey, Field, MultiIndex, MultiPolynomial  # noqa: E402


def poly(multidegree, dims, terms, field=Field.REAL):
    """
    Build from {(block, ...): coefficient} where each block is a tuple of
    (coordinate, exponent) pairs, e.g. {(((0, 1),), ((0, 1), (1, 1))): 2.0}
    """
    return MultiPolynomial(
        field, multidegree, dims,
        {CoefficientKey(tuple(MultiIndex(tuple(b)) for b in key)): v for key, v in terms.items()},
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def make_poly():
    return poly


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: ratio scans at full size (deselect with -m 'not slow')")
