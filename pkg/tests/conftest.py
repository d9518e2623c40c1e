import numpy as np
import pytest

from ellid.geometry import StandardEllipse


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


def random_ellipse(rng, center_scale=10.0, r_min=0.2, r_max=4.0) -> StandardEllipse:
    xc = rng.uniform(-center_scale, center_scale, size=2)
    r1 = rng.uniform(r_min, r_max)
    r2 = r1 * rng.uniform(1.0, 3.0)
    theta = rng.uniform(0.0, np.pi)
    return StandardEllipse.canonical(xc, r1, r2, theta)


def interior_samples(e: StandardEllipse, n: int, rng) -> np.ndarray:
    """Uniform-ish samples strictly inside the ellipse."""
    u = np.sqrt(rng.uniform(0.0, 1.0, size=n))
    phi = rng.uniform(0.0, 2.0 * np.pi, size=n)
    body = np.column_stack([e.r2 * u * np.cos(phi), e.r1 * u * np.sin(phi)])
    c, s = np.cos(e.theta), np.sin(e.theta)
    rot = np.array([[c, -s], [s, c]])
    return e.xc + body @ rot.T


def shoelace_area(polygon: np.ndarray) -> float:
    x, y = polygon[:, 0], polygon[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
