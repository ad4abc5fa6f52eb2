import numpy as np
import pytest

from mess.datagen import BrusselatorConfig, gen_brusselator, gen_random_walk, gen_test_image


def brute_distances(X):
    n = X.shape[1]
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            D[i, j] = np.sqrt(np.sum((X[:, i] - X[:, j]) ** 2))
    return D


def brute_potentials(R):
    n = R.shape[0]
    return np.array([R[:j, :j].sum() / j**2 for j in range(1, n + 1)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def brusselator_snapshots():
    return gen_brusselator(BrusselatorConfig(grid_points=100, n_snapshots=500, t_end=10.0))


@pytest.fixture(scope="session")
def random_walk_snapshots():
    return gen_random_walk(50, 200, 1.0, seed=0)


@pytest.fixture(scope="session")
def image_snapshots():
    return gen_test_image(96, 128, seed=0)
