import numpy as np
import pytest

from pddrdo import NOMINAL_MEANS, build_bases, build_index_set, reference_law
from pddrdo.pdd import design_matrix
from pddrdo.surrogate import transform_x_to_z


@pytest.fixture(scope="session")
def law():
    return reference_law()


@pytest.fixture(scope="session")
def nominal_r():
    return 1.0 / NOMINAL_MEANS


@pytest.fixture(scope="session")
def bases_m5(law, nominal_r):
    return build_bases(list(law.marginals), nominal_r, 5)


@pytest.fixture(scope="session")
def idx_m5():
    return build_index_set(5, 2, 5)


@pytest.fixture(scope="session")
def bases_m11(law, nominal_r):
    return build_bases(list(law.marginals), nominal_r, 11)


@pytest.fixture(scope="session")
def idx_m11():
    return build_index_set(5, 2, 11)


def make_design_matrix(law, bases, idx, r, n, seed):
    X = law.sample_lhs(n, seed)
    Z = transform_x_to_z(X, r)
    return X, Z, design_matrix(list(bases), idx, Z)
