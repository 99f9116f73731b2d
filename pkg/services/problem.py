"""Set-valued objectives F(x) = {f^1(x), ..., f^p(x)} and their derivative oracles.

Component indices are 1-based throughout the package, matching the way the
partition elements a = (a_1, ..., a_omega) are written.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from services.cone import ContractViolation

logger = logging.getLogger(__name__)

ValueOracle = Callable[[int, np.ndarray], np.ndarray]
BatchOracle = Callable[[np.ndarray], np.ndarray]
JacobianOracle = Callable[[int, np.ndarray], np.ndarray]
HessianOracle = Callable[[int, np.ndarray], np.ndarray]

EPS = np.finfo(float).eps
JAC_STEP = EPS ** (1.0 / 3.0)
HESS_STEP = EPS ** (1.0 / 4.0)  # second differences of values


class EvaluationError(RuntimeError):
    """An oracle produced a non-finite or malformed value."""

    def __init__(self, i: int, x: np.ndarray, what: str = "value"):
        self.i = i
        self.x = np.array(x, dtype=float)
        super().__init__(f"{what} of component {i} is not finite at x={self.x.tolist()}")


@dataclass(frozen=True, eq=False)
class SetMapProblem:
    """
    A set-valued map given by p component functions R^n -> R^m.

    value(i, x) is required. batch_value(x) -> (p, m) is an optional fast path
    for evaluating every component at once. jacobian(i, x) -> (m, n) and
    hessian(i, x) -> (m, n, n) fall back to central finite differences.
    """

    name: str
    n: int
    m: int
    p: int
    value: ValueOracle
    init_lower: np.ndarray
    init_upper: np.ndarray
    jacobian_oracle: JacobianOracle | None = None
    hessian_oracle: HessianOracle | None = None
    batch_value: BatchOracle | None = field(default=None, repr=False)

    @property
    def has_analytic_jacobian(self) -> bool:
        return self.jacobian_oracle is not None

    @property
    def derivative_kind(self) -> str:
        if self.hessian_oracle is not None:
            return "analytic-jacobian+hessian"
        if self.jacobian_oracle is not None:
            return "analytic-jacobian"
        return "finite-difference"

    def sample(self, rng: np.random.Generator, count: int = 1) -> np.ndarray:
        """Uniform draws from the initial-point box, shape (count, n)."""
        return rng.uniform(self.init_lower, self.init_upper, size=(count, self.n))


def _check_index(problem: SetMapProblem, i: int) -> None:
    if not 1 <= i <= problem.p:
        raise ContractViolation(f"component index {i} outside [1, {problem.p}] for {problem.name}")


def _as_point(problem: SetMapProblem, x) -> np.ndarray:
    v = np.asarray(x, dtype=float).reshape(-1)
    if v.shape[0] != problem.n:
        raise ContractViolation(f"{problem.name} expects x in R^{problem.n}, got length {v.shape[0]}")
    return v


def evaluate(problem: SetMapProblem, i: int, x) -> np.ndarray:
    """f^i(x) as a vector in R^m."""
    _check_index(problem, i)
    v = _as_point(problem, x)
    out = np.asarray(problem.value(i, v), dtype=float).reshape(-1)
    if out.shape[0] != problem.m or not np.all(np.isfinite(out)):
        raise EvaluationError(i, v)
    return out


def evaluate_all(problem: SetMapProblem, x) -> np.ndarray:
    """All component values stacked as a (p, m) array; row i-1 holds f^i(x)."""
    v = _as_point(problem, x)
    if problem.batch_value is not None:
        out = np.asarray(problem.batch_value(v), dtype=float)
        if out.shape != (problem.p, problem.m):
            raise EvaluationError(0, v, "batch value")
        bad = ~np.all(np.isfinite(out), axis=1)
        if np.any(bad):
            raise EvaluationError(int(np.flatnonzero(bad)[0]) + 1, v)
        return out
    return np.vstack([evaluate(problem, i, v) for i in range(1, problem.p + 1)])


def _fd_jacobian(problem: SetMapProblem, i: int, v: np.ndarray) -> np.ndarray:
    jac = np.empty((problem.m, problem.n))
    for j in range(problem.n):
        h = JAC_STEP * max(1.0, abs(v[j]))
        step = np.zeros(problem.n)
        step[j] = h
        jac[:, j] = (evaluate(problem, i, v + step) - evaluate(problem, i, v - step)) / (2.0 * h)
    return jac


def jacobian(problem: SetMapProblem, i: int, x) -> np.ndarray:
    """Jacobian of f^i at x, shape (m, n)."""
    _check_index(problem, i)
    v = _as_point(problem, x)
    if problem.jacobian_oracle is None:
        return _fd_jacobian(problem, i, v)
    jac = np.asarray(problem.jacobian_oracle(i, v), dtype=float).reshape(problem.m, problem.n)
    if not np.all(np.isfinite(jac)):
        raise EvaluationError(i, v, "jacobian")
    return jac


def _fd_hessians_from_jacobian(problem: SetMapProblem, i: int, v: np.ndarray) -> np.ndarray:
    hess = np.empty((problem.m, problem.n, problem.n))
    for j in range(problem.n):
        h = JAC_STEP * max(1.0, abs(v[j]))
        step = np.zeros(problem.n)
        step[j] = h
        hess[:, :, j] = (jacobian(problem, i, v + step) - jacobian(problem, i, v - step)) / (2.0 * h)
    return hess


def _fd_hessians_from_values(problem: SetMapProblem, i: int, v: np.ndarray) -> np.ndarray:
    n = problem.n
    hs = HESS_STEP * np.maximum(1.0, np.abs(v))
    f0 = evaluate(problem, i, v)
    hess = np.empty((problem.m, n, n))
    for j in range(n):
        ej = np.zeros(n)
        ej[j] = hs[j]
        hess[:, j, j] = (evaluate(problem, i, v + ej) - 2.0 * f0 + evaluate(problem, i, v - ej)) / hs[j] ** 2
        for k in range(j + 1, n):
            ek = np.zeros(n)
            ek[k] = hs[k]
            mixed = (
                evaluate(problem, i, v + ej + ek)
                - evaluate(problem, i, v + ej - ek)
                - evaluate(problem, i, v - ej + ek)
                + evaluate(problem, i, v - ej - ek)
            ) / (4.0 * hs[j] * hs[k])
            hess[:, j, k] = mixed
            hess[:, k, j] = mixed
    return hess


def hessians(problem: SetMapProblem, i: int, x) -> np.ndarray:
    """The m Hessians of f^{i,1}, ..., f^{i,m} at x, shape (m, n, n), symmetric."""
    _check_index(problem, i)
    v = _as_point(problem, x)
    if problem.hessian_oracle is not None:
        hess = np.asarray(problem.hessian_oracle(i, v), dtype=float).reshape(problem.m, problem.n, problem.n)
        if not np.all(np.isfinite(hess)):
            raise EvaluationError(i, v, "hessian")
    elif problem.jacobian_oracle is not None:
        hess = _fd_hessians_from_jacobian(problem, i, v)
    else:
        hess = _fd_hessians_from_values(problem, i, v)
    return 0.5 * (hess + np.swapaxes(hess, 1, 2))


class DerivativeReport(NamedTuple):
    """Outcome of comparing analytic derivatives against finite differences."""

    problem: str
    component: int
    x: list[float]
    jacobian_error: float
    hessian_error: float | None
    tol: float
    passed: bool


def _relative_deviation(analytic: np.ndarray, reference: np.ndarray) -> float:
    scale = max(1.0, float(np.max(np.abs(reference))))
    return float(np.max(np.abs(analytic - reference))) / scale


def check_derivatives(problem: SetMapProblem, i: int, x, tol: float = 1e-5) -> DerivativeReport:
    """
    Max relative deviation of the analytic Jacobian (and Hessian, when present)
    from central finite differences.
    """
    if problem.jacobian_oracle is None:
        raise ContractViolation(f"{problem.name} has no analytic jacobian to check")
    _check_index(problem, i)
    v = _as_point(problem, x)

    jac_error = _relative_deviation(jacobian(problem, i, v), _fd_jacobian(problem, i, v))

    hess_error = None
    if problem.hessian_oracle is not None:
        hess_error = _relative_deviation(
            hessians(problem, i, v), _fd_hessians_from_jacobian(problem, i, v)
        )

    passed = jac_error <= tol and (hess_error is None or hess_error <= tol)
    if not passed:
        logger.debug(f"Derivative check failed for {problem.name}[{i}] at {v.tolist()}: jac={jac_error:.3e} hess={hess_error}")
    return DerivativeReport(
        problem=problem.name,
        component=i,
        x=v.tolist(),
        jacobian_error=jac_error,
        hessian_error=hess_error,
        tol=tol,
        passed=passed,
    )


class CheckSummary(NamedTuple):
    problem: str
    points: int
    tol: float
    max_jacobian_error: float
    max_hessian_error: float | None
    passed: bool
    failures: list[DerivativeReport]


def check_problem(
    problem: SetMapProblem,
    points: int = 100,
    tol: float = 1e-5,
    seed: int = 0,
    components_per_point: int = 5,
) -> CheckSummary:
    """
    check_derivatives at uniform random points of the initial box. Problems
    with few components are checked on all of them, otherwise on a seeded
    random subset per point.
    """
    if problem.jacobian_oracle is None:
        raise ContractViolation(f"{problem.name} has no analytic jacobian to check")
    rng = np.random.default_rng(seed)
    reports = []
    for x in problem.sample(rng, points):
        if problem.p <= components_per_point:
            components = range(1, problem.p + 1)
        else:
            components = rng.choice(np.arange(1, problem.p + 1), size=components_per_point, replace=False)
        reports.extend(check_derivatives(problem, int(i), x, tol) for i in components)

    hess_errors = [r.hessian_error for r in reports if r.hessian_error is not None]
    failures = [r for r in reports if not r.passed]
    if failures:
        logger.warning(f"{problem.name}: {len(failures)} of {len(reports)} derivative checks above {tol:g}")
    return CheckSummary(
        problem=problem.name,
        points=points,
        tol=tol,
        max_jacobian_error=max(r.jacobian_error for r in reports),
        max_hessian_error=max(hess_errors) if hess_errors else None,
        passed=not failures,
        failures=failures,
    )
