import numpy as np
import pytest
from hypothesis import strategies as st

from stockwise import Product, TableDemand


@pytest.fixture
def coin():
    return TableDemand({0: 0.5, 1: 0.5})


@pytest.fixture
def fixtures_dir(request):
    return request.path.parent / "fixtures"


def random_table(rng: np.random.Generator, max_support: int = 50, sparse: bool = True) -> TableDemand:
    """A random pmf on {0..m}; some masses zeroed to create flat cdf stretches."""
    m = int(rng.integers(0, max_support + 1))
    w = rng.random(m + 1)
    if sparse and m > 0:
        w[rng.random(m + 1) < 0.3] = 0.0
        if not w.any():
            w[rng.integers(0, m + 1)] = 1.0
    w = w / w.sum()
    return TableDemand({k: float(v) for k, v in enumerate(w) if v > 0})


def random_product(rng: np.random.Generator, name: str = "p") -> Product:
    # c, s drawn from (0, 10]
    return Product(name, float(10 * (1 - rng.random())), float(10 * (1 - rng.random())))


@st.composite
def tables(draw, max_support=30):
    m = draw(st.integers(0, max_support))
    weights = draw(st.lists(st.integers(0, 20), min_size=m + 1, max_size=m + 1))
    if sum(weights) == 0:
        weights[-1] = 1
    total = sum(weights)
    return TableDemand({k: w / total for k, w in enumerate(weights) if w})


products = st.builds(
    Product,
    st.just("p"),
    st.floats(0.01, 10, allow_nan=False),
    st.floats(0.01, 10, allow_nan=False),
)
