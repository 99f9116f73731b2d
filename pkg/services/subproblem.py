"""Quadratic models, the Theta function and the trust-region min-max subproblem.

For a fixed partition element a the subproblem is

    min_{||s||_2 <= radius}  max_j max{ delta(m^{a_j}(s)), delta(J_j s) }

With delta(y) = max_l <w_l, y> every term is a scalar function of s, so the
objective is the pointwise max of the family

    q_{j,l}(s) = g_{j,l}^T s + 1/2 s^T H_{j,l} s,    lambda_{j,l}(s) = g_{j,l}^T s

with g_{j,l} = J_j^T w_l and H_{j,l} = sum_r w_{l,r} Hess f^{a_j, r}.
"""

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize

from schemas import SubproblemSettings
from services.cone import ContractViolation, PolyhedralCone, oriented_distance
from services.partition import PartitionElement, PartitionView, enumerate_partition, partition_at
from services.problem import SetMapProblem, hessians, jacobian

logger = logging.getLogger(__name__)

BRUTE_FORCE_MAX_DIM = 3
BRUTE_FORCE_CHUNK = 20000
TIE_TOL = 1e-12


class LocalModel:
    """Per-point derivative cache so each component is differentiated once per x."""

    def __init__(self, problem: SetMapProblem, x):
        self.problem = problem
        self.x = np.array(x, dtype=float)
        self._jac: dict[int, np.ndarray] = {}
        self._hess: dict[int, np.ndarray] = {}

    def jacobian(self, i: int) -> np.ndarray:
        if i not in self._jac:
            self._jac[i] = jacobian(self.problem, i, self.x)
        return self._jac[i]

    def hessians(self, i: int) -> np.ndarray:
        if i not in self._hess:
            self._hess[i] = hessians(self.problem, i, self.x)
        return self._hess[i]

    def linear_term(self, i: int, s: np.ndarray) -> np.ndarray:
        return self.jacobian(i) @ s

    def model_value(self, i: int, s: np.ndarray) -> np.ndarray:
        """m^i(s) = J_i s + 1/2 (s^T H_{i,r} s)_r; no constant term."""
        s = np.asarray(s, dtype=float)
        curvature = np.einsum("i,rij,j->r", s, self.hessians(i), s)
        return self.jacobian(i) @ s + 0.5 * curvature


def model_value(problem: SetMapProblem, x, component_index: int, s) -> np.ndarray:
    """Second-order model of f^i around x evaluated at step s."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    return LocalModel(problem, x).model_value(component_index, s)


@dataclass(frozen=True, eq=False)
class ScalarizedFamily:
    """Gradients (k, n) and curvatures (k, n, n) of the scalar members q_{j,l}."""

    gradients: np.ndarray
    curvatures: np.ndarray
    members: list[tuple[int, int]]  # (j, l), 0-based

    @property
    def n(self) -> int:
        return self.gradients.shape[1]

    def linear(self, s: np.ndarray) -> np.ndarray:
        return self.gradients @ s

    def quadratic(self, s: np.ndarray) -> np.ndarray:
        return self.gradients @ s + 0.5 * np.einsum("i,kij,j->k", s, self.curvatures, s)

    def objective(self, s: np.ndarray) -> float:
        lin = self.gradients @ s
        quad = lin + 0.5 * np.einsum("i,kij,j->k", s, self.curvatures, s)
        return float(max(np.max(lin), np.max(quad)))

    def objective_many(self, steps: np.ndarray) -> np.ndarray:
        """Objective for each row of a (N, n) array."""
        lin = steps @ self.gradients.T
        quad = lin + 0.5 * np.einsum("ni,kij,nj->nk", steps, self.curvatures, steps)
        return np.maximum(np.max(lin, axis=1), np.max(quad, axis=1))

    def active_subgradient(self, s: np.ndarray, tol: float) -> np.ndarray:
        """Gradient of the first member whose value is within tol of the max."""
        lin = self.gradients @ s
        quad = lin + 0.5 * np.einsum("i,kij,j->k", s, self.curvatures, s)
        top = max(np.max(lin), np.max(quad))
        for k in range(len(self.members)):
            if quad[k] >= top - tol:
                return self.gradients[k] + self.curvatures[k] @ s
            if lin[k] >= top - tol:
                return self.gradients[k]
        return self.gradients[0]


def build_family(cone: PolyhedralCone, local: LocalModel, a: PartitionElement) -> ScalarizedFamily:
    grads = []
    curvs = []
    members = []
    for j, i in enumerate(a):
        jac = local.jacobian(i)  # (m, n)
        hess = local.hessians(i)  # (m, n, n)
        for l, w in enumerate(cone.normalized_normals):
            grads.append(jac.T @ w)
            curvs.append(np.tensordot(w, hess, axes=1))
            members.append((j, l))
    return ScalarizedFamily(np.array(grads), np.array(curvs), members)


def theta_of(problem: SetMapProblem, cone: PolyhedralCone, x, a: PartitionElement, s, local: LocalModel | None = None) -> float:
    """Theta_x(a, s) = max_j max{ delta(m^{a_j}(s)), delta(J_{a_j} s) }."""
    local = local or LocalModel(problem, x)
    s = np.atleast_1d(np.asarray(s, dtype=float))
    return max(
        max(oriented_distance(cone, local.model_value(i, s)), oriented_distance(cone, local.linear_term(i, s)))
        for i in a
    )


class InnerSolution(NamedTuple):
    s: np.ndarray
    t: float
    candidates_evaluated: int


@dataclass(frozen=True, eq=False)
class SubproblemSolution:
    """Best (a, s, t) over the enumerated partition set."""

    a: PartitionElement
    s: np.ndarray
    t: float
    candidates_evaluated: int
    truncated: bool = False
    oracle_gap: float | None = None


def project_to_ball(s: np.ndarray, radius: float) -> np.ndarray:
    norm = np.linalg.norm(s)
    if norm <= radius:
        return s
    return s * (radius / norm)


def _cauchy_points(family: ScalarizedFamily, radius: float) -> list[np.ndarray]:
    """Exact minimizer of each q_{j,l} along its steepest-descent ray, clipped to the ball."""
    points = []
    for g, h in zip(family.gradients, family.curvatures):
        gg = float(g @ g)
        if gg == 0.0:
            continue
        boundary = radius / np.sqrt(gg)
        curvature = float(g @ h @ g)
        tau = min(gg / curvature, boundary) if curvature > 0 else boundary
        points.append(-tau * g)
    return points


def _random_ball_points(rng: np.random.Generator, n: int, radius: float, count: int) -> np.ndarray:
    if count == 0:
        return np.empty((0, n))
    directions = rng.standard_normal((count, n))
    directions /= np.linalg.norm(directions, axis=1)[:, None]
    radii = radius * rng.uniform(size=count) ** (1.0 / n)
    return directions * radii[:, None]


def _refine(family: ScalarizedFamily, s0: np.ndarray, radius: float, settings: SubproblemSettings) -> tuple[np.ndarray, float]:
    """Projected subgradient descent on the max function with steps c / sqrt(k)."""
    best_s, best_t = s0, family.objective(s0)
    s = s0
    c = settings.step_scale * radius
    for k in range(1, settings.refine_iterations + 1):
        g = family.active_subgradient(s, settings.active_tol)
        norm = np.linalg.norm(g)
        if norm == 0.0:
            break
        s = project_to_ball(s - (c / np.sqrt(k)) * g / norm, radius)
        t = family.objective(s)
        if t < best_t:
            best_s, best_t = s, t
    return best_s, best_t


def _polish(family: ScalarizedFamily, s0: np.ndarray, radius: float) -> np.ndarray | None:
    """Local solve of min t s.t. q_{j,l}(s) <= t, lambda_{j,l}(s) <= t, ||s||^2 <= radius^2."""
    n = family.n
    g = family.gradients
    h = family.curvatures

    def members(z):
        s, t = z[:n], z[n]
        lin = g @ s
        quad = lin + 0.5 * np.einsum("i,kij,j->k", s, h, s)
        return np.concatenate([t - quad, t - lin])

    def members_jac(z):
        s = z[:n]
        quad_grad = g + np.einsum("kij,j->ki", h, s)
        rows = np.vstack([-quad_grad, -g])
        return np.hstack([rows, np.ones((rows.shape[0], 1))])

    def ball(z):
        s = z[:n]
        return np.array([radius**2 - s @ s])

    def ball_jac(z):
        return np.concatenate([-2.0 * z[:n], [0.0]])[None, :]

    z0 = np.concatenate([s0, [family.objective(s0)]])
    try:
        res = minimize(
            lambda z: z[n],
            z0,
            jac=lambda z: np.concatenate([np.zeros(n), [1.0]]),
            method="SLSQP",
            constraints=[
                {"type": "ineq", "fun": members, "jac": members_jac},
                {"type": "ineq", "fun": ball, "jac": ball_jac},
            ],
            options={"maxiter": 200, "ftol": 1e-15},
        )
    except (ValueError, np.linalg.LinAlgError) as e:
        logger.debug(f"SLSQP polish failed: {e}")
        return None
    if not np.all(np.isfinite(res.x)):
        return None
    return project_to_ball(res.x[:n], radius)


def solve_family(family: ScalarizedFamily, radius: float, settings: SubproblemSettings) -> InnerSolution:
    """Multistart (zero, Cauchy points, random ball points) + refinement + polish."""
    if not radius > 0:
        raise ContractViolation(f"trust-region radius must be positive, got {radius}")
    n = family.n
    rng = np.random.default_rng(settings.seed)

    candidates = [np.zeros(n), *_cauchy_points(family, radius)]
    steps = np.vstack([np.vstack(candidates), _random_ball_points(rng, n, radius, settings.n_random)])
    values = family.objective_many(steps)
    norms = np.linalg.norm(steps, axis=1)
    order = np.lexsort((norms, values))

    best_s, best_t = steps[order[0]], float(values[order[0]])
    for idx in order[: settings.n_starts]:
        s, t = _refine(family, steps[idx], radius, settings)
        if t < best_t:
            best_s, best_t = s, t

    evaluated = steps.shape[0] + settings.n_starts * settings.refine_iterations
    if settings.polish and np.any(family.gradients):
        polished = _polish(family, best_s, radius)
        if polished is not None:
            t = family.objective(polished)
            evaluated += 1
            if t < best_t:
                best_s, best_t = polished, t

    return InnerSolution(s=np.array(best_s, dtype=float), t=float(family.objective(best_s)), candidates_evaluated=evaluated)


def solve_inner(
    problem: SetMapProblem,
    cone: PolyhedralCone,
    x,
    a: PartitionElement,
    radius: float,
    settings: SubproblemSettings | None = None,
    local: LocalModel | None = None,
) -> InnerSolution:
    """Solve the min-max subproblem for one fixed partition element a."""
    if not radius > 0:
        raise ContractViolation(f"trust-region radius must be positive, got {radius}")
    settings = settings or SubproblemSettings()
    local = local or LocalModel(problem, x)
    family = build_family(cone, local, a)
    return solve_family(family, radius, settings)


def solve_outer(
    problem: SetMapProblem,
    cone: PolyhedralCone,
    x,
    radius: float,
    settings: SubproblemSettings | None = None,
    view: PartitionView | None = None,
    local: LocalModel | None = None,
) -> SubproblemSolution:
    """
    Minimize Theta_x over P_x x B: solve_inner for every enumerated a.

    Values within TIE_TOL of the incumbent count as ties; ties keep the
    lexicographically first a, which is the enumeration order.
    """
    if not radius > 0:
        raise ContractViolation(f"trust-region radius must be positive, got {radius}")
    settings = settings or SubproblemSettings()
    view = view or partition_at(problem, cone, x)
    local = local or LocalModel(problem, x)

    enumeration = enumerate_partition(view)
    best: SubproblemSolution | None = None
    evaluated = 0
    for a in enumeration.elements:
        inner = solve_inner(problem, cone, x, a, radius, settings, local)
        evaluated += inner.candidates_evaluated
        if best is None or inner.t < best.t - TIE_TOL * max(1.0, abs(best.t)):
            best = SubproblemSolution(a=a, s=inner.s, t=inner.t, candidates_evaluated=0)

    return SubproblemSolution(
        a=best.a,
        s=best.s,
        t=best.t,
        candidates_evaluated=evaluated,
        truncated=enumeration.truncated,
    )


def brute_force_inner(
    problem: SetMapProblem,
    cone: PolyhedralCone,
    x,
    a: PartitionElement,
    radius: float,
    grid_resolution: int = 10**5,
    local: LocalModel | None = None,
) -> float:
    """
    Minimum of the subproblem objective over a uniform grid of the enclosing
    box restricted to the ball, plus s = 0. grid_resolution is the total
    number of box grid points.
    """
    if problem.n > BRUTE_FORCE_MAX_DIM:
        raise ContractViolation(f"brute force oracle supports n <= {BRUTE_FORCE_MAX_DIM}, got n={problem.n}")
    if not radius > 0:
        raise ContractViolation(f"trust-region radius must be positive, got {radius}")
    local = local or LocalModel(problem, x)
    family = build_family(cone, local, a)

    n = problem.n
    per_axis = max(2, int(np.ceil(grid_resolution ** (1.0 / n))))
    axis = np.linspace(-radius, radius, per_axis)
    mesh = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1).reshape(-1, n)
    inside = mesh[np.linalg.norm(mesh, axis=1) <= radius]

    best = family.objective(np.zeros(n))
    for start in range(0, inside.shape[0], BRUTE_FORCE_CHUNK):
        chunk = inside[start : start + BRUTE_FORCE_CHUNK]
        best = min(best, float(np.min(family.objective_many(chunk))))
    return best
