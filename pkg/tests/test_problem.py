"""Tests for set-valued problems and their derivative oracles."""

import dataclasses

import numpy as np
import pytest

from services.cone import ContractViolation
from services.problem import (
    EvaluationError,
    check_derivatives,
    check_problem,
    evaluate,
    evaluate_all,
    hessians,
    jacobian,
)
from tests.conftest import make_problem


def test_note_values(note_problem):
    """Test the reference instance values at 0 and at the rejected trial point."""
    np.testing.assert_allclose(evaluate(note_problem, 1, [0.0]), [-8.0, -6.4])
    assert evaluate(note_problem, 1, [-5 / 32])[0] == pytest.approx(29.9294, abs=1e-3)


def test_note_derivatives(note_problem):
    """Test analytic Jacobian and Hessian at 0."""
    jac = jacobian(note_problem, 1, [0.0])
    assert jac.shape == (2, 1)
    assert jac[0, 0] == pytest.approx(2.0)
    assert jac[1, 0] == pytest.approx(1.0)
    hess = hessians(note_problem, 1, [0.0])
    assert hess.shape == (2, 1, 1)
    assert hess[0, 0, 0] == pytest.approx(8.0)
    assert hess[1, 0, 0] == pytest.approx(6.4)


def test_evaluate_is_deterministic(biquad):
    """Test repeated evaluation is bitwise equal."""
    x = np.array([0.3, -1.7])
    assert np.array_equal(evaluate(biquad, 1, x), evaluate(biquad, 1, x))


def test_evaluate_rejects_bad_index_and_shape(biquad):
    """Test out-of-range components and wrong dimensions are contract violations."""
    with pytest.raises(ContractViolation):
        evaluate(biquad, 0, [0.0, 0.0])
    with pytest.raises(ContractViolation):
        evaluate(biquad, 2, [0.0, 0.0])
    with pytest.raises(ContractViolation):
        evaluate(biquad, 1, [0.0])


def test_evaluate_flags_non_finite():
    """Test a non-finite oracle value raises EvaluationError."""
    problem = make_problem("log", 1, 1, [lambda x: [np.log(x[0])]])
    with pytest.raises(EvaluationError):
        with np.errstate(divide="ignore", invalid="ignore"):
            evaluate(problem, 1, [-1.0])


def test_finite_difference_fallback():
    """Test FD Jacobian and Hessian on a cubic without analytic oracles."""
    problem = make_problem("cubic", 2, 1, [lambda x: [x[0] ** 3 + x[0] * x[1]]])
    x = [0.5, 2.0]
    np.testing.assert_allclose(jacobian(problem, 1, x), [[3 * 0.25 + 2.0, 0.5]], rtol=1e-8)
    np.testing.assert_allclose(hessians(problem, 1, x)[0], [[3.0, 1.0], [1.0, 0.0]], atol=1e-5)
    assert problem.derivative_kind == "finite-difference"


def _exp_sin(x):
    return [np.exp(x[0]) * np.sin(x[1])]


def _exp_sin_jacobian(x):
    return [[np.exp(x[0]) * np.sin(x[1]), np.exp(x[0]) * np.cos(x[1])]]


def test_finite_difference_hessian_paths():
    """Test Hessians difference the Jacobian oracle when present and the values otherwise."""
    x = np.array([0.3, 1.1])
    e, s, c = np.exp(x[0]), np.sin(x[1]), np.cos(x[1])
    exact = [[e * s, e * c], [e * c, -e * s]]

    with_jacobian = make_problem("exp-sin", 2, 1, [_exp_sin], jacobians=[_exp_sin_jacobian])
    values_only = make_problem("exp-sin", 2, 1, [_exp_sin])
    assert with_jacobian.derivative_kind == "analytic-jacobian"

    from_jacobian = hessians(with_jacobian, 1, x)[0]
    from_values = hessians(values_only, 1, x)[0]
    np.testing.assert_allclose(from_jacobian, exact, atol=1e-8)
    np.testing.assert_allclose(from_values, exact, atol=1e-5)
    np.testing.assert_array_equal(from_values, from_values.T)


def test_evaluate_all_stacks_components(twin_problem):
    """Test evaluate_all returns a (p, m) array with row i-1 = f^i."""
    values = evaluate_all(twin_problem, [0.0])
    np.testing.assert_array_equal(values, [[0, 1], [0, 1], [1, 0]])


def test_check_derivatives_quadratic():
    """Test the check on x^T x is exact up to roundoff."""
    problem = make_problem(
        "quadratic",
        2,
        2,
        [lambda x: [x @ x, x @ x]],
        jacobians=[lambda x: [2 * x, 2 * x]],
        hessians=[lambda x: [2 * np.eye(2), 2 * np.eye(2)]],
    )
    report = check_derivatives(problem, 1, [0.3, -0.7])
    assert report.passed
    assert report.jacobian_error <= 1e-9
    assert report.hessian_error <= 1e-9


def test_check_derivatives_note(note_problem):
    """Test the reference instance passes at x = 0.3."""
    report = check_derivatives(note_problem, 1, [0.3], tol=1e-5)
    assert report.passed


def test_check_derivatives_corrupted_jacobian(note_problem):
    """Test a deliberately wrong Jacobian fails the check."""
    good = note_problem.jacobian_oracle
    broken = dataclasses.replace(note_problem, jacobian_oracle=lambda i, x: 1.1 * good(i, x))
    report = check_derivatives(broken, 1, [0.3], tol=1e-5)
    assert not report.passed
    assert report.jacobian_error > 1e-3


def test_check_derivatives_requires_analytic_jacobian():
    """Test finite-difference-only problems cannot be checked."""
    problem = make_problem("fd", 1, 1, [lambda x: [x[0] ** 2]])
    with pytest.raises(ContractViolation):
        check_derivatives(problem, 1, [0.0])
    with pytest.raises(ContractViolation):
        check_problem(problem)


def test_check_problem_summary(note_problem):
    """Test check_problem aggregates per-point reports."""
    summary = check_problem(note_problem, points=10, tol=1e-5, seed=1)
    assert summary.passed
    assert summary.points == 10
    assert summary.failures == []
    assert summary.max_hessian_error is not None
