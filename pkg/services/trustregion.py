"""Trust-region driver: reduction ratios, step classification, radius updates, stopping."""

import logging
import time
from typing import NamedTuple

import numpy as np

from schemas import SubproblemSettings, TrustRegionConfig
from services.cone import PolyhedralCone, SetRelation, lower_set_relation, oriented_distance
from services.partition import PartitionElement, enumerate_partition, partition_from_values
from services.problem import EvaluationError, SetMapProblem, evaluate, evaluate_all
from services.subproblem import LocalModel, ScalarizedFamily, build_family, solve_family, solve_outer
from services.traces import IterationRecord, RunResult, RunStatus, StepStatus

logger = logging.getLogger(__name__)

DENOMINATOR_GUARD = 1e-14


class NumericalCriticality(ArithmeticError):
    """Predicted reduction vanished: the point is numerically critical."""


def _predicted(cone: PolyhedralCone, local: LocalModel, a: PartitionElement, s: np.ndarray) -> list[float]:
    denominators = []
    for i in a:
        m_s = local.model_value(i, s)
        denom = oriented_distance(cone, -m_s)  # delta(m(0) - m(s)), m(0) = 0
        guard = DENOMINATOR_GUARD * max(1.0, abs(oriented_distance(cone, m_s)))
        if denom <= guard:
            raise NumericalCriticality(f"predicted reduction {denom:.3e} for component {i}")
        denominators.append(denom)
    return denominators


def reduction_ratio(
    problem: SetMapProblem,
    cone: PolyhedralCone,
    x,
    a: PartitionElement,
    s,
    local: LocalModel | None = None,
) -> np.ndarray:
    """rho_j = -delta(f^{a_j}(x+s) - f^{a_j}(x)) / delta(-m^{a_j}(s)) for every j."""
    x = np.asarray(x, dtype=float)
    s = np.atleast_1d(np.asarray(s, dtype=float))
    local = local or LocalModel(problem, x)
    denominators = _predicted(cone, local, a, s)
    rho = [
        -oriented_distance(cone, evaluate(problem, i, x + s) - evaluate(problem, i, x)) / denom
        for i, denom in zip(a, denominators)
    ]
    return np.array(rho)


def naive_reduction_ratio(
    problem: SetMapProblem,
    cone: PolyhedralCone,
    x,
    a: PartitionElement,
    s,
    local: LocalModel | None = None,
) -> np.ndarray:
    """
    delta(f(x) - f(x+s)) / delta(m(0) - m(s)).

    Diagnostic only: a value above eta1 does not certify that every component
    decreased, which is why the driver uses reduction_ratio.
    """
    x = np.asarray(x, dtype=float)
    s = np.atleast_1d(np.asarray(s, dtype=float))
    local = local or LocalModel(problem, x)
    denominators = _predicted(cone, local, a, s)
    return np.array(
        [
            oriented_distance(cone, evaluate(problem, i, x) - evaluate(problem, i, x + s)) / denom
            for i, denom in zip(a, denominators)
        ]
    )


def classify_step(rho, eta1: float, eta2: float) -> StepStatus:
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < eta1):
        return StepStatus.UNSUCCESSFUL
    if np.all(rho >= eta2):
        return StepStatus.VERY_SUCCESSFUL
    return StepStatus.SUCCESSFUL


def update_radius(status: StepStatus, omega: float, config: TrustRegionConfig) -> float:
    """
    Successful keeps omega, very successful doubles it up to omega_max,
    unsuccessful shrinks by the midpoint of [gamma1, gamma2].
    """
    if status is StepStatus.VERY_SUCCESSFUL:
        return min(2.0 * omega, config.omega_max)
    if status is StepStatus.UNSUCCESSFUL:
        return 0.5 * (config.gamma1 + config.gamma2) * omega
    return omega


def model_error(problem: SetMapProblem, x, i: int, s) -> float:
    """||f^i(x+s) - f^i(x) - m^i(s)||_inf."""
    x = np.asarray(x, dtype=float)
    s = np.atleast_1d(np.asarray(s, dtype=float))
    local = LocalModel(problem, x)
    diff = evaluate(problem, i, x + s) - evaluate(problem, i, x) - local.model_value(i, s)
    return float(np.max(np.abs(diff)))


class CriticalityReport(NamedTuple):
    theta: float
    first_order_value: float
    is_critical: bool


def criticality(
    problem: SetMapProblem,
    cone: PolyhedralCone,
    x,
    settings: SubproblemSettings | None = None,
    radius: float = 1.0,
    tol: float = 1e-6,
) -> CriticalityReport:
    """
    theta(x) on a ball of the given radius, and the first-order test
    min_{||s||<=1} max_j delta(J_{a_j} s) over P_x; x is K-critical when that
    value is not negative.
    """
    settings = settings or SubproblemSettings()
    x = np.asarray(x, dtype=float)
    values = evaluate_all(problem, x)
    view = partition_from_values(cone, x, values)
    local = LocalModel(problem, x)
    theta = solve_outer(problem, cone, x, radius, settings, view, local).t

    first_order = 0.0
    for a in enumerate_partition(view).elements:
        family = build_family(cone, local, a)
        linear = ScalarizedFamily(family.gradients, np.zeros_like(family.curvatures), family.members)
        first_order = min(first_order, solve_family(linear, 1.0, settings).t)
    return CriticalityReport(theta=theta, first_order_value=first_order, is_critical=first_order >= -tol)


def run(problem: SetMapProblem, cone: PolyhedralCone, x0, config: TrustRegionConfig | None = None) -> RunResult:
    """
    Trust-region iteration for min F(x) under the lower set-less order.

    Stops when |t_k| < epsilon (Converged) or after max_iter iterations
    (MaxIter). Oracle failures end the run with status Error and the trace so
    far.
    """
    config = config or TrustRegionConfig()
    x = np.array(x0, dtype=float).reshape(-1)
    x_start = x.copy()
    omega = config.omega0
    trace: list[IterationRecord] = []
    violations = 0
    started = time.perf_counter()
    logger.info(f"TRM start: problem={problem.name} x0={x.tolist()} cone={cone.name or cone.dim}")

    def finish(status: RunStatus, message: str = "") -> RunResult:
        elapsed = time.perf_counter() - started
        logger.info(f"TRM stop: problem={problem.name} status={status.value} iterations={len(trace)} t={trace[-1].t if trace else None}")
        return RunResult(
            problem=problem.name,
            solver="trm",
            x0=x_start.tolist(),
            x=x.tolist(),
            status=status,
            trace=trace,
            message=message,
            wall_seconds=elapsed,
            descent_violations=violations,
        )

    try:
        values = evaluate_all(problem, x)
        view = partition_from_values(cone, x, values, config.dedup_tol, config.partition_cap, config.partition_rule)
        local = LocalModel(problem, x)

        for k in range(config.max_iter):
            tick = time.perf_counter()
            solution = solve_outer(problem, cone, x, omega, config.subproblem, view, local)
            record = IterationRecord(
                k=k,
                x=x.tolist(),
                omega=omega,
                a=solution.a.indices,
                s=solution.s.tolist(),
                t=solution.t,
                rho=[],
                status=StepStatus.CONVERGED,
                minimal_values=[v.tolist() for v in view.minimal_values],
                partition_size=view.size,
                truncated=solution.truncated,
            )

            if abs(solution.t) < config.epsilon:
                record.wall_ms = 1000.0 * (time.perf_counter() - tick)
                trace.append(record)
                return finish(RunStatus.CONVERGED)

            try:
                rho = reduction_ratio(problem, cone, x, solution.a, solution.s, local)
            except NumericalCriticality as e:
                logger.warning(f"Treating x={x.tolist()} as critical: {e}")
                record.wall_ms = 1000.0 * (time.perf_counter() - tick)
                trace.append(record)
                return finish(RunStatus.CONVERGED, str(e))

            status = classify_step(rho, config.eta1, config.eta2)
            record.rho = rho.tolist()
            record.status = status

            if status.advances:
                x_next = x + solution.s
                values_next = evaluate_all(problem, x_next)
                relation = lower_set_relation(cone, values_next, values)
                record.descent = relation.value
                if relation is not SetRelation.STRICT_LOWER:
                    violations += 1
                    logger.warning(f"Accepted step at k={k} gives {relation.value} instead of StrictLower")
                record.step_length = float(np.linalg.norm(solution.s))
                x, values = x_next, values_next
                view = partition_from_values(cone, x, values, config.dedup_tol, config.partition_cap, config.partition_rule)
                local = LocalModel(problem, x)

            omega = update_radius(status, omega, config)
            record.wall_ms = 1000.0 * (time.perf_counter() - tick)
            trace.append(record)
            logger.debug(f"k={k} status={status.value} t={solution.t:.6g} omega={record.omega:.4g} rho={record.rho}")

    except EvaluationError as e:
        logger.exception(f"Oracle failure in {problem.name}")
        return finish(RunStatus.ERROR, str(e))

    return finish(RunStatus.MAX_ITER)
