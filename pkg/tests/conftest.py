import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lassozero.design import standardize
from lassozero.rng import SeededRng


@pytest.fixture
def rng():
    return SeededRng(1234)


@pytest.fixture
def small_standardized_design(rng):
    """25 x 40 standardized Gaussian design shared by the quick tests."""
    raw = rng.child(77).generator().standard_normal((25, 40))
    return standardize(raw)


def gaussian(rng: SeededRng, *shape):
    return rng.generator().standard_normal(shape)


@pytest.fixture
def gaussian_draw():
    return gaussian
