import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'src'))

from cluster_pack.graph import grid_graph
from config import RunConfig


def base_dict(rows=1, cols=3, **physics):
    values = {
        'kappa': 0.01,
        'delta': 30.0,
        'gamma': 1e-8,
        'temperature': 0.01,
        'r': 1.0,
    }
    values.update(physics)
    return {
        'graph': {'rows': rows, 'cols': cols},
        'target': {'J0': 3.4e-3, 'J': 6e-4},
        'physics': values,
    }


@pytest.fixture
def base_config():
    return RunConfig.from_dict(base_dict())


@pytest.fixture
def line3():
    return grid_graph(1, 3)


@pytest.fixture
def rng():
    return np.random.default_rng(7)
