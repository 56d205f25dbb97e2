import numpy as np
import pytest

from helfrich import shapes
from helfrich.curvature import curvature_field


@pytest.fixture(scope="session")
def corpus():
    return shapes.standard_corpus()


@pytest.fixture(scope="session")
def icosphere4():
    return shapes.icosphere(4)


@pytest.fixture(scope="session")
def icosphere4_curv(icosphere4):
    return curvature_field(icosphere4)


@pytest.fixture(scope="session")
def split_sphere():
    mesh = shapes.octasphere(4)
    return mesh, shapes.equator_phase_labels(mesh)


@pytest.fixture(scope="session")
def split_sphere5():
    mesh = shapes.octasphere(5)
    return mesh, shapes.equator_phase_labels(mesh)


def rotation_matrix(seed=0):
    rng = np.random.default_rng(seed)
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )
