import math

import numpy as np
import pytest

from parity_probe.register import QuditState, RegisterShape

R2 = 1 / math.sqrt(2)


@pytest.fixture
def bell01():
    """(|01> + |10>)/sqrt(2)"""
    return QuditState(RegisterShape(2, 2), [0, R2, R2, 0])


@pytest.fixture
def bell00():
    """(|00> + |11>)/sqrt(2)"""
    return QuditState(RegisterShape(2, 2), [R2, 0, 0, R2])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
