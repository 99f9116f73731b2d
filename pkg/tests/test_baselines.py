"""Tests for the steepest-descent baseline and the solver registry."""

import numpy as np
import pytest

from schemas import SteepestDescentParams
from services import baselines
from services.baselines import (
    SolverOptions,
    UnknownSolverError,
    get_solver,
    register_solver,
    sd_run,
    steepest_direction,
)
from services.cone import SetRelation
from services.partition import PartitionElement
from services.subproblem import LocalModel
from services.traces import RunResult, RunStatus, StepStatus
from tests.conftest import make_problem


def test_sd_square_pair_decreases(square_pair, k1):
    """Test SD drives (x^2, x^2) from x = 1 to |x| < 0.1 with monotone values."""
    result = sd_run(square_pair, k1, [1.0])
    assert result.converged
    assert result.iterations <= 100
    assert abs(result.x[0]) < 0.1
    xs = [abs(r.x[0]) for r in result.trace]
    assert all(b <= a for a, b in zip(xs, xs[1:]))
    assert result.descent_violations == 0
    assert {r.status for r in result.trace} <= {StepStatus.ACCEPTED, StepStatus.CONVERGED}


def test_sd_critical_start(square_pair, k1):
    """Test SD stops at iteration 0 from a critical point."""
    result = sd_run(square_pair, k1, [0.0])
    assert result.status is RunStatus.CONVERGED
    assert result.iterations == 0
    assert result.solver == "sd"


def test_steepest_direction_points_downhill(biquad, k1):
    """Test the direction decreases both objectives at (2, 2)."""
    local = LocalModel(biquad, [2.0, 2.0])
    direction = steepest_direction(k1, local, [PartitionElement((1,))])
    assert direction.value < 0
    assert np.all(direction.slopes < 0)
    # symmetric point: the common descent direction is along -(1, 1)
    assert direction.d[0] == pytest.approx(direction.d[1], abs=1e-6)


def test_sd_accepted_steps_descend(biquad, k1):
    """Test every accepted SD step gives a StrictLower image set."""
    result = sd_run(biquad, k1, [2.0, -1.0], SteepestDescentParams(max_iter=30))
    accepted = [r for r in result.trace if r.status is StepStatus.ACCEPTED]
    assert accepted
    assert all(r.descent == SetRelation.STRICT_LOWER.value for r in accepted)
    assert all(0 < r.omega <= 1.0 for r in accepted)


def test_sd_line_search_exhaustion(k1):
    """Test an uphill direction from a wrong Jacobian exhausts backtracking and fails the run."""
    wrong = make_problem(
        "wrong-sign",
        1,
        2,
        [lambda x: [x[0] ** 2, x[0] ** 2]],
        jacobians=[lambda x: [[-2 * x[0]], [-2 * x[0]]]],
    )
    result = sd_run(wrong, k1, [1.0], SteepestDescentParams(max_backtracks=3))
    assert result.status is RunStatus.FAILED
    assert not result.converged
    assert result.trace[-1].status is StepStatus.REJECTED
    assert "line search" in result.message


def test_registry_lookup():
    """Test the bundled solvers are registered and unknown names raise."""
    assert get_solver("trm") is baselines.SOLVERS["trm"]
    assert get_solver("sd") is baselines.SOLVERS["sd"]
    with pytest.raises(UnknownSolverError) as exc:
        get_solver("newton")
    assert "newton" in str(exc.value)


def test_cgm_placeholder(biquad, k1):
    """Test the conjugate gradient slot tells the caller to register an implementation."""
    with pytest.raises(NotImplementedError, match="register_solver"):
        get_solver("cgm")(biquad, k1, np.array([2.0, 2.0]), SolverOptions())


def test_register_solver(monkeypatch, biquad, k1):
    """Test third-party solvers plug in and duplicates need replace=True."""
    monkeypatch.setattr(baselines, "SOLVERS", dict(baselines.SOLVERS))

    def stay(problem, cone, x0, options):
        x = list(map(float, x0))
        return RunResult(problem=problem.name, solver="stay", x0=x, x=x, status=RunStatus.CONVERGED, trace=[])

    register_solver("stay", stay)
    assert get_solver("stay")(biquad, k1, [1.0, 1.0], SolverOptions()).converged
    with pytest.raises(ValueError):
        register_solver("stay", stay)
    register_solver("stay", stay, replace=True)


def test_trm_through_registry(biquad, k1):
    """Test the registry entry runs the trust-region driver with the bundled options."""
    result = get_solver("trm")(biquad, k1, np.array([2.0, 2.0]), SolverOptions())
    assert result.solver == "trm"
    assert result.converged
