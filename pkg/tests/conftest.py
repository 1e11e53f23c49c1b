import math

import numpy as np
import pytest

from dscatter.potential import builtin, sample
from dscatter.transform import build_basis


@pytest.fixture(scope="session")
def pair_small():
    """Exceptional square-well pair on a coarse grid."""
    return sample(builtin("square_well_pair"), 20.0, 1025)


@pytest.fixture(scope="session")
def pair_basis():
    """Distorted basis of the pair with images 8L apart."""
    p = sample(builtin("square_well_pair"), 16.0, 1025)
    return build_basis(p, math.pi / p.h, 4 * 1024 + 1)


@pytest.fixture(scope="session")
def nls_basis_small():
    p = sample(builtin("square_well_pair"), 128.0, 4097)
    return build_basis(p, math.pi / (2 * p.h), 4097)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
