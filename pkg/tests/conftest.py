import numpy as np
import pytest
from hypothesis import settings, strategies as st

from symcone.algebra import Algebra

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

ALGEBRAS = [Algebra.sym(1), Algebra.sym(2), Algebra.sym(3), Algebra.lorentz(3), Algebra.lorentz(5)]

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=ALGEBRAS, ids=str)
def algebra(request):
    return request.param
