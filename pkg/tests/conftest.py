import numpy as np
import pytest

from metricround import cycle_metric, make_lbk, validate_metric


@pytest.fixture
def c4():
    return cycle_metric(4)


@pytest.fixture
def l32():
    return make_lbk(3, 2)


@pytest.fixture
def equilateral():
    return validate_metric([[0, 1, 1], [1, 0, 1], [1, 1, 0]])


@pytest.fixture
def collinear():
    # d(x0,x1)=1, d(x0,x2)=2, d(x1,x2)=1
    return validate_metric([[0, 1, 2], [1, 0, 1], [2, 1, 0]])


def euclidean_points(rng, n, dim=3):
    pts = rng.normal(size=(n, dim))
    return validate_metric(np.linalg.norm(pts[:, None] - pts[None], axis=-1))
