import numpy as np
import pytest

from mlpr import ProblemInstance, flatten_tensor

from oracles import E2_ALPHA, e2_cube


@pytest.fixture
def e2():
    """The documented n=2 instance with alpha = 0.4 and v = e/2."""
    return ProblemInstance(flatten_tensor(e2_cube()), E2_ALPHA, np.array([0.5, 0.5]))
