import numpy as np
import pytest

from minklab import bodies as B


def unit_directions(dim, count, seed):
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((count, dim))
    return u / np.linalg.norm(u, axis=1, keepdims=True)


@pytest.fixture
def planar_bodies():
    """A representative mix of 2D symmetric bodies, one per representation."""
    return {
        "square": B.cube(2),
        "diamond": B.cross_polytope(2),
        "disc": B.ball(1.0, 2),
        "ellipse": B.ellipsoid_semiaxes(np.array([2.0, 0.5])),
        "p4": B.pball(4, 1.0, 2),
        "random": B.random_symmetric_polytope(2, 9, seed=41),
    }
