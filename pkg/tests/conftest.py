"""Test fixtures and configuration."""

import os
from collections.abc import AsyncGenerator

import numpy as np
import pytest
import pytest_asyncio
from httpx import ASGITransport, AsyncClient

# Set test environment before importing app
os.environ["SETOPT_DEBUG"] = "true"
os.environ["SETOPT_LOG_LEVEL"] = "WARNING"

from main import app
from services.cone import PolyhedralCone
from services.problem import SetMapProblem
from services.suite import cone_k1, cone_k2, cone_k3, instantiate


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-budget solver runs (deselect with -m 'not slow')")


def make_problem(name: str, n: int, m: int, components, jacobians=None, hessians=None) -> SetMapProblem:
    """Wrap plain callables f(x) -> R^m (one per component) as a SetMapProblem."""
    return SetMapProblem(
        name=name,
        n=n,
        m=m,
        p=len(components),
        value=lambda i, x: np.asarray(components[i - 1](x), dtype=float),
        init_lower=np.full(n, -1.0),
        init_upper=np.full(n, 1.0),
        jacobian_oracle=None if jacobians is None else (lambda i, x: np.asarray(jacobians[i - 1](x), dtype=float)),
        hessian_oracle=None if hessians is None else (lambda i, x: np.asarray(hessians[i - 1](x), dtype=float)),
    )


@pytest.fixture
def k1() -> PolyhedralCone:
    """Nonnegative orthant in R^2."""
    return cone_k1(2)


@pytest.fixture
def k2() -> PolyhedralCone:
    return cone_k2()


@pytest.fixture
def k3() -> PolyhedralCone:
    return cone_k3()


@pytest.fixture
def note_problem() -> SetMapProblem:
    """Single-component instance where the naive ratio accepts a bad step."""
    return instantiate("NOTE-RATIO")


@pytest.fixture
def biquad() -> SetMapProblem:
    """f(x) = ((x1 - 1)^2 + x2^2, x1^2 + (x2 - 1)^2)."""
    return instantiate("BIQUAD")


@pytest.fixture
def square_pair() -> SetMapProblem:
    """p = 1, f(x) = (x^2, x^2) on R."""
    return make_problem(
        "square-pair",
        1,
        2,
        [lambda x: [x[0] ** 2, x[0] ** 2]],
        jacobians=[lambda x: [[2 * x[0]], [2 * x[0]]]],
        hessians=[lambda x: [[[2.0]], [[2.0]]]],
    )


@pytest.fixture
def twin_problem() -> SetMapProblem:
    """Components 1 and 2 coincide everywhere; F(0) = {(0, 1), (0, 1), (1, 0)}."""
    twin = lambda x: [x[0], 1 + x[0] ** 2]
    twin_jac = lambda x: [[1.0], [2 * x[0]]]
    twin_hess = lambda x: [[[0.0]], [[2.0]]]
    return make_problem(
        "twins",
        1,
        2,
        [twin, twin, lambda x: [1 + x[0] ** 2, x[0]]],
        jacobians=[twin_jac, twin_jac, lambda x: [[2 * x[0]], [1.0]]],
        hessians=[twin_hess, twin_hess, lambda x: [[[2.0]], [[0.0]]]],
    )


@pytest_asyncio.fixture
async def client() -> AsyncGenerator[AsyncClient, None]:
    """Create async test client."""
    transport = ASGITransport(app=app)
    async with AsyncClient(transport=transport, base_url="http://test") as ac:
        yield ac
