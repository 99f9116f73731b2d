"""Tests for the problem catalog and cone constructors."""

import numpy as np
import pytest

from schemas import ConeSpec
from services.cone import ContractViolation, Position, classify
from services.problem import check_problem, evaluate, evaluate_all
from services.suite import (
    UnknownProblemError,
    catalog,
    cone_k1,
    cone_k2,
    cone_k3,
    instantiate,
    resolve_cone,
)

VARIANTS = [(spec.name, n, m) for spec in catalog() for n, m in spec.variants]
ANALYTIC = [v for v in VARIANTS if instantiate(*v).has_analytic_jacobian]


def test_catalog_contents():
    """Test the catalog lists every problem with its variants."""
    names = [spec.name for spec in catalog()]
    assert len(names) >= 17
    assert len(set(names)) == len(names)
    zdt1 = next(spec for spec in catalog() if spec.name == "GGTZ1-ZDT1")
    assert zdt1.variants == [(2, 2), (5, 2), (8, 2), (10, 2)]
    assert "EX-BQT2-MOD" in names


def test_instantiate_variants():
    """Test default, partial and explicit variant selection."""
    assert (instantiate("GGTZ1-ZDT1").n, instantiate("GGTZ1-ZDT1").m) == (2, 2)
    assert instantiate("GGTZ1-ZDT1", n=8).n == 8
    assert instantiate("GGTZ6-DTLZ5", m=5).n == 7
    with pytest.raises(UnknownProblemError):
        instantiate("GGTZ1-ZDT1", 3, 2)
    with pytest.raises(UnknownProblemError):
        instantiate("NOPE")


@pytest.mark.parametrize("name,n,m", VARIANTS)
def test_values_finite_on_box(name, n, m):
    """Test every component is finite on 1000 points of the initial box."""
    problem = instantiate(name, n, m)
    assert problem.p in (1, 100)
    rng = np.random.default_rng(0)
    for x in problem.sample(rng, 1000):
        values = evaluate_all(problem, x)
        assert values.shape == (problem.p, m)
        assert np.all(np.isfinite(values))


def test_modified_instance_at_origin():
    """Test every component of the modified instance equals (1, 0) at the origin."""
    problem = instantiate("EX-BQT2-MOD")
    np.testing.assert_array_equal(evaluate_all(problem, [0.0, 0.0]), np.tile([1.0, 0.0], (100, 1)))


def test_modified_instance_first_component():
    """Test i = 1 reduces to (e^{x1/2} cos x2 - x2 sin x2, e^{x2/20} sin x1 + x2 cos x2)."""
    problem = instantiate("EX-BQT2-MOD")
    x1, x2 = 1.3, -0.4
    expected = [
        np.exp(x1 / 2) * np.cos(x2) - x2 * np.sin(x2),
        np.exp(x2 / 20) * np.sin(x1) + x2 * np.cos(x2),
    ]
    np.testing.assert_allclose(evaluate(problem, 1, [x1, x2]), expected)


def test_modified_instance_differs_from_bqt2():
    """Test the two-period variant changes the second component only."""
    bqt2 = instantiate("GGCZ16-BQT2")
    modified = instantiate("EX-BQT2-MOD")
    x = [1.0, 2.0]
    a, b = evaluate(bqt2, 30, x), evaluate(modified, 30, x)
    assert a[0] == pytest.approx(b[0])
    assert a[1] != pytest.approx(b[1])


def test_dgo1_shift():
    """Test the DGO1 shift at i = 50 where the angle equals pi."""
    problem = instantiate("GGTZ7-DGO1")
    value = evaluate(problem, 50, [0.0])
    assert value[0] == pytest.approx(np.sin(np.pi - 1))
    assert value[1] == pytest.approx(np.sin(0.7) - 1.0)


@pytest.mark.parametrize("name,n,m", ANALYTIC)
def test_analytic_derivatives(name, n, m):
    """Test analytic Jacobians (and Hessians) agree with finite differences."""
    summary = check_problem(instantiate(name, n, m), points=100, tol=1e-5, seed=3)
    assert summary.passed, summary.failures[:3]


def test_cones():
    """Test the three cone constructors and their membership."""
    assert cone_k1(2).contains([1.0, 1.0])
    assert classify(cone_k2(), [1.0, 7.0]) is Position.BOUNDARY
    assert cone_k2().contains([1.0, 7.0])
    assert classify(cone_k3(), [-1.0, -1.0]) is Position.INTERIOR
    assert cone_k1(4).dim == 4
    with pytest.raises(ContractViolation):
        cone_k1(0)


def test_resolve_cone():
    """Test builder names and inline specs resolve against the image dimension."""
    assert resolve_cone("K1", 3).dim == 3
    assert resolve_cone("K2", 2).name == "K2"
    inline = resolve_cone(ConeSpec(dim=2, normals=[[1, 0], [1, 1]], name="wedge"), 2)
    assert inline.name == "wedge"
    assert resolve_cone({"dim": 2, "normals": [[1, 0], [0, 1]]}, 2).dim == 2
    with pytest.raises(ContractViolation):
        resolve_cone("K3", 3)
    with pytest.raises(ContractViolation):
        resolve_cone(ConeSpec(dim=3, normals=[[1, 0, 0], [0, 1, 0], [0, 0, 1]]), 2)
    with pytest.raises(ContractViolation):
        resolve_cone("K9", 2)
