import pytest

from magsim.parameters import paper_params


@pytest.fixture
def params2():
    return paper_params(2)


@pytest.fixture
def params3():
    return paper_params(3)
