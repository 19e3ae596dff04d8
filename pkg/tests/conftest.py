import pytest

from loopquant.series import Window
from loopquant.vertex import product_vertex


@pytest.fixture(scope="session")
def kw_small():
    """Single-point vertex on a small genus-1 window."""
    return product_vertex(Window(N=1, K=5, D=5, G=1, L=5))


@pytest.fixture(scope="session")
def kw_two():
    return product_vertex(Window(N=2, K=4, D=5, G=1, L=4))
