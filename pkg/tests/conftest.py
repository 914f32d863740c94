import sys
from pathlib import Path

import numpy as np
import pytest

from riskrfe import Dataset, Task

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def toy_classification():
    """y = sign(x0); features 1 and 2 are noise. Linearly separable."""
    rng = np.random.default_rng(11)
    X = rng.uniform(-1.0, 1.0, (24, 3))
    X[:, 0] += np.where(X[:, 0] >= 0, 0.2, -0.2)  # keep a margin around 0
    y = np.where(X[:, 0] > 0, 1.0, -1.0)
    return Dataset(X, y, Task.CLASSIFICATION)


@pytest.fixture
def toy_regression():
    """y = 1.5*x0 - x1 + small noise; feature 2 is noise."""
    rng = np.random.default_rng(29)
    X = rng.uniform(-1.0, 1.0, (30, 3))
    y = 1.5 * X[:, 0] - X[:, 1] + 0.01 * rng.standard_normal(30)
    return Dataset(X, y, Task.REGRESSION)
