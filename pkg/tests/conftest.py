from __future__ import annotations

from functools import lru_cache

import pytest

from betashift.beta_expansion import make_base

GOLDEN = "x^2-x-1"
TRIBONACCI = "x^3-x^2-x-1"
PLASTIC = "x^3-x-1"
SOFIC = "x^2-3x+1"  # expansion of 1 is 2(1)^inf: sofic, not of finite type
SILVER = "x^2-2x-1"


@lru_cache(maxsize=None)
def base(poly: str):
    return make_base(poly)


@pytest.fixture(scope="session")
def golden():
    return base(GOLDEN)


@pytest.fixture(scope="session")
def tribonacci():
    return base(TRIBONACCI)


@pytest.fixture(scope="session")
def two():
    return base("x-2")


@pytest.fixture(scope="session")
def plastic():
    return base(PLASTIC)


@pytest.fixture(scope="session")
def sofic():
    return base(SOFIC)
