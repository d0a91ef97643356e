import sys
from pathlib import Path

import numpy as np
import pytest

# lets test modules import the dense oracle helper
sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)
