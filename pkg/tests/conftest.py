import numpy as np
import pytest
from hypothesis import strategies as st

from fiberbergman.family import builtin_family
from fiberbergman.polyalg import HomogPoly, monomials


@pytest.fixture(scope="session")
def conic():
    return builtin_family("conic")


@pytest.fixture(scope="session")
def cuspidal():
    return builtin_family("cuspidal")


@pytest.fixture(scope="session")
def reduced():
    return builtin_family("reduced")


@pytest.fixture(scope="session")
def line_family():
    return builtin_family("line")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


small_ints = st.integers(min_value=-4, max_value=4)


@st.composite
def homog_polys(draw, degree=None, max_degree=3, nonzero=False):
    d = draw(st.integers(0, max_degree)) if degree is None else degree
    monos = monomials(d)
    coeffs = draw(st.lists(small_ints, min_size=len(monos), max_size=len(monos)))
    if nonzero and not any(coeffs):
        coeffs[0] = 1
    return HomogPoly(d, dict(zip(monos, coeffs)))
