import numpy as np
import pytest

from pseudobosons import build_builtin, fix_normalization


def _normalized(name, **params):
    m = build_builtin(name, **params)
    fix_normalization(m)
    return m


@pytest.fixture(scope="session")
def example1():
    return _normalized("example1")


@pytest.fixture(scope="session")
def example2():
    return _normalized("example2")


@pytest.fixture(scope="session")
def bosonic():
    return _normalized("bosonic")


@pytest.fixture(scope="session")
def swanson():
    return _normalized("swanson", theta=0.3)


@pytest.fixture(scope="session")
def shifted():
    return _normalized("shifted", alpha=0.15 + 0.1j, beta=0.2)


@pytest.fixture(scope="session")
def constant_alpha():
    return _normalized("constant_alpha", alpha_a=1.0, alpha_b=0.5, k=0.7)


@pytest.fixture(scope="session")
def all_builtins(example1, example2, bosonic, swanson, shifted,
                 constant_alpha):
    return {
        "bosonic": bosonic,
        "shifted": shifted,
        "swanson": swanson,
        "constant_alpha": constant_alpha,
        "example1": example1,
        "example2": example2,
    }


@pytest.fixture
def grid():
    return np.linspace(-4.0, 4.0, 161)
