import numpy as np
import pytest

from normalproj.congruence import build_congruence
from normalproj.surface import SurfaceParam, segre
from normalproj.syzygy import admissible_degree, build_matrix_rep


@pytest.fixture(scope="session")
def segre_surface():
    return segre()


@pytest.fixture(scope="session")
def segre_congruence(segre_surface):
    return build_congruence(segre_surface)


@pytest.fixture(scope="session")
def segre_rep(segre_congruence):
    return build_matrix_rep(segre_congruence, (2, 2, 0))


def random_pipeline(kind, degree, rational, seed):
    """(surface, congruence, matrix at the admissible degree) for a seeded random surface."""
    s = SurfaceParam.random(kind, degree, rational, np.random.default_rng(seed))
    c = build_congruence(s)
    return s, c, build_matrix_rep(c, admissible_degree(s))
