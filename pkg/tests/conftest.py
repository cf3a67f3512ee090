import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from glioseg import RegionMask

SPACINGS = [(1.0, 1.0, 1.0), (1.0, 1.0, 2.0), (0.5, 1.0, 1.0)]


@pytest.fixture
def rng():
    return np.random.default_rng(20250823)


def random_mask(rng, shape=(5, 5, 5), spacing=(1.0, 1.0, 1.0), density=0.4) -> RegionMask:
    return RegionMask(rng.random(shape) < density, spacing)
