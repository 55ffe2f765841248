import pytest

from owrte import GaussianIsotropic, TransportParams, build_xsection_table, make_grid


@pytest.fixture(scope="session")
def gauss2():
    return GaussianIsotropic(d_total=2)


@pytest.fixture(scope="session")
def gauss3():
    return GaussianIsotropic(d_total=3)


@pytest.fixture(scope="session")
def p20():
    return TransportParams(k=1.0, ell=20.0, alpha=0.1, d=1)


@pytest.fixture(scope="session")
def grid64(p20):
    return make_grid(p20, 64)


@pytest.fixture(scope="session")
def table64(p20, gauss2, grid64):
    return build_xsection_table(p20, gauss2, grid64)
