"""Solver registry and the first-order steepest-descent baseline.

Every solver is a callable (problem, cone, x0, options) -> RunResult so the
benchmark runner treats them uniformly. Third-party methods plug in through
register_solver.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.optimize import minimize

from schemas import SteepestDescentParams, TrustRegionConfig
from services import trustregion
from services.cone import PolyhedralCone, SetRelation, lower_set_relation, oriented_distance_rows
from services.partition import PartitionElement, enumerate_partition, partition_from_values
from services.problem import EvaluationError, SetMapProblem, evaluate_all
from services.subproblem import LocalModel, build_family
from services.traces import IterationRecord, RunResult, RunStatus, StepStatus

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverOptions:
    """Per-solver parameter bundles; each solver reads the part it needs."""

    trust_region: TrustRegionConfig = field(default_factory=TrustRegionConfig)
    steepest_descent: SteepestDescentParams = field(default_factory=SteepestDescentParams)


SolverFn = Callable[[SetMapProblem, PolyhedralCone, np.ndarray, SolverOptions], RunResult]


class UnknownSolverError(KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown solver"


class Direction(NamedTuple):
    a: PartitionElement
    d: np.ndarray
    value: float  # max_j delta(J_{a_j} d) + 1/2 ||d||^2
    slopes: np.ndarray  # delta(J_{a_j} d) per j


def _direction_for(family_gradients: np.ndarray) -> tuple[np.ndarray, float]:
    """min_{d, tau} tau + 1/2 ||d||^2  s.t.  g_{j,l}^T d <= tau."""
    n = family_gradients.shape[1]
    if not np.any(family_gradients):
        return np.zeros(n), 0.0

    res = minimize(
        lambda z: z[n] + 0.5 * z[:n] @ z[:n],
        np.zeros(n + 1),
        jac=lambda z: np.concatenate([z[:n], [1.0]]),
        method="SLSQP",
        constraints=[
            {
                "type": "ineq",
                "fun": lambda z: z[n] - family_gradients @ z[:n],
                "jac": lambda z: np.hstack([-family_gradients, np.ones((family_gradients.shape[0], 1))]),
            }
        ],
        options={"maxiter": 200, "ftol": 1e-15},
    )
    d = res.x[:n]
    value = float(np.max(family_gradients @ d) + 0.5 * d @ d)
    if not np.isfinite(value) or value > 0.0:
        return np.zeros(n), 0.0
    return d, value


def steepest_direction(cone: PolyhedralCone, local: LocalModel, elements: list[PartitionElement]) -> Direction:
    """Best (a, d) over the partition set; ties keep the first a."""
    best: Direction | None = None
    for a in elements:
        family = build_family(cone, local, a)
        d, value = _direction_for(family.gradients)
        if best is None or value < best.value:
            slopes = oriented_distance_rows(cone, np.vstack([local.jacobian(i) @ d for i in a]))
            best = Direction(a=a, d=d, value=value, slopes=slopes)
    return best


def sd_run(
    problem: SetMapProblem,
    cone: PolyhedralCone,
    x0,
    params: SteepestDescentParams | None = None,
) -> RunResult:
    """
    Steepest descent with Armijo backtracking on every selected component:
    delta(f^{a_j}(x + t d) - f^{a_j}(x)) <= armijo_rho * t * delta(J_{a_j} d).
    """
    params = params or SteepestDescentParams()
    x = np.array(x0, dtype=float).reshape(-1)
    x_start = x.copy()
    trace: list[IterationRecord] = []
    violations = 0
    started = time.perf_counter()
    logger.info(f"SD start: problem={problem.name} x0={x.tolist()}")

    def finish(status: RunStatus, message: str = "") -> RunResult:
        logger.info(f"SD stop: problem={problem.name} status={status.value} iterations={len(trace)}")
        return RunResult(
            problem=problem.name,
            solver="sd",
            x0=x_start.tolist(),
            x=x.tolist(),
            status=status,
            trace=trace,
            message=message,
            wall_seconds=time.perf_counter() - started,
            descent_violations=violations,
        )

    try:
        values = evaluate_all(problem, x)
        for k in range(params.max_iter):
            tick = time.perf_counter()
            view = partition_from_values(cone, x, values, params.dedup_tol, params.partition_cap)
            local = LocalModel(problem, x)
            direction = steepest_direction(cone, local, enumerate_partition(view).elements)
            record = IterationRecord(
                k=k,
                x=x.tolist(),
                omega=0.0,
                a=direction.a.indices,
                s=direction.d.tolist(),
                t=direction.value,
                rho=[],
                status=StepStatus.CONVERGED,
                minimal_values=[v.tolist() for v in view.minimal_values],
                partition_size=view.size,
                truncated=view.truncated,
            )

            if direction.value > -params.epsilon:
                record.wall_ms = 1000.0 * (time.perf_counter() - tick)
                trace.append(record)
                return finish(RunStatus.CONVERGED)

            rows = [i - 1 for i in direction.a]
            step = 1.0
            for _ in range(params.max_backtracks + 1):
                values_next = evaluate_all(problem, x + step * direction.d)
                decrease = oriented_distance_rows(cone, values_next[rows] - values[rows])
                if np.all(decrease <= params.armijo_rho * step * direction.slopes):
                    break
                step *= params.nu
            else:
                record.status = StepStatus.REJECTED
                record.wall_ms = 1000.0 * (time.perf_counter() - tick)
                trace.append(record)
                return finish(RunStatus.FAILED, f"line search exhausted {params.max_backtracks} reductions at k={k}")

            relation = lower_set_relation(cone, values_next, values)
            if relation is not SetRelation.STRICT_LOWER:
                violations += 1
                logger.warning(f"SD step at k={k} gives {relation.value} instead of StrictLower")
            record.status = StepStatus.ACCEPTED
            record.omega = step
            record.descent = relation.value
            record.step_length = float(step * np.linalg.norm(direction.d))
            x, values = x + step * direction.d, values_next
            record.wall_ms = 1000.0 * (time.perf_counter() - tick)
            trace.append(record)

    except EvaluationError as e:
        logger.exception(f"Oracle failure in {problem.name}")
        return finish(RunStatus.ERROR, str(e))

    return finish(RunStatus.MAX_ITER)


def _run_trm(problem: SetMapProblem, cone: PolyhedralCone, x0: np.ndarray, options: SolverOptions) -> RunResult:
    return trustregion.run(problem, cone, x0, options.trust_region)


def _run_sd(problem: SetMapProblem, cone: PolyhedralCone, x0: np.ndarray, options: SolverOptions) -> RunResult:
    return sd_run(problem, cone, x0, options.steepest_descent)


def _run_cgm(problem: SetMapProblem, cone: PolyhedralCone, x0: np.ndarray, options: SolverOptions) -> RunResult:
    raise NotImplementedError(
        "the conjugate gradient baseline is not bundled; provide one with register_solver('cgm', fn)"
    )


SOLVERS: dict[str, SolverFn] = {
    "trm": _run_trm,
    "sd": _run_sd,
    "cgm": _run_cgm,
}


def register_solver(name: str, solver: SolverFn, replace: bool = False) -> None:
    """Add a solver under name; existing names need replace=True."""
    if name in SOLVERS and not replace:
        raise ValueError(f"solver '{name}' is already registered")
    SOLVERS[name] = solver
    logger.info(f"Registered solver '{name}'")


def get_solver(name: str) -> SolverFn:
    try:
        return SOLVERS[name]
    except KeyError:
        raise UnknownSolverError(f"unknown solver '{name}'; available: {sorted(SOLVERS)}") from None
