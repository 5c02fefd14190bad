import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_sphere_points(rng, n, d):
    v = rng.normal(size=(n, d)) + 1j * rng.normal(size=(n, d))
    return v / np.linalg.norm(v, axis=1)[:, None]


def random_ball_points(rng, n, d, rmax=0.95):
    pts = random_sphere_points(rng, n, d)
    radii = rmax * rng.uniform(0.05, 1.0, n) ** (1.0 / (2 * d))
    return pts * radii[:, None]
