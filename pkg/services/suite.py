"""
Catalog of set-valued test problems and the ordering cones used with them.

Most catalog rows have the form f^i(x) = b(x) + c_i: a shared base map plus a
per-component shift drawn from a (phi_i, psi_i) grid with i = 10(j - 1) + l.
Those are built with _additive, which also shares the base Jacobian across
components. The remaining rows depend on i inside the x-terms and are written
out directly.

Formulas that admit more than one reading are resolved as follows; each
reading is kept next to the code that implements it.
- JOS1a: the second component's perturbation is read as + 0.1 sin(pi i / 50),
  mirroring the first component's + 0.1 cos(pi i / 50).
- BQT1: the bracket is read as cos^2(x) [t_i (1, -1) + (1 - t_i)(1, 1)] with
  t_i = (i - 1) / 99.
- Hil: the angle closes after the sin(2 pi x2) term, the radius is
  1 + 0.5 cos(2 pi x1).
- DTLZ1: the 1/2 factor applies to every row, as in the source family.
- DTLZ1 uses psi_l = pi/5 (l - 1) + pi/10 and ln|tan(psi/2)| so that the
  logarithm is finite on the whole grid.
- DTLZ3: the first shift row reads sech(phi_i) cos(psi_i).
- FDSa draws its shifts from the same pi/5 x pi/5 grid as the DTLZ rows.
- Brown and Dennis: n = 4 (the rows use x1..x4), m = 3 rows; row 3
  keeps x3 in its first square.
- Trigonometric: row 4 is unsquared and unshifted.
- ZDT1/ZDT4 take sqrt(|f1 / g|) and DGO2 takes sqrt(|81 - x^2|) so steps that
  leave the box stay finite.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from schemas import ConeSpec
from services.cone import ContractViolation, PolyhedralCone, make_cone
from services.problem import SetMapProblem

logger = logging.getLogger(__name__)

P = 100
PI = np.pi


class UnknownProblemError(KeyError):
    """Unknown catalog name or unsupported (n, m) for a known name."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown problem"


# --- Cones ---


def cone_k1(m: int) -> PolyhedralCone:
    """The nonnegative orthant R^m_+."""
    if m < 1:
        raise ContractViolation(f"cone dimension must be >= 1, got {m}")
    return make_cone(np.eye(m), name="K1")


def cone_k2() -> PolyhedralCone:
    """{y : 5 y2 >= 7 y1, y2 <= 7 y1}."""
    return make_cone([[-7.0, 5.0], [7.0, -1.0]], name="K2")


def cone_k3() -> PolyhedralCone:
    """{y : y1 >= 3 y2, 3 y1 <= y2}."""
    return make_cone([[1.0, -3.0], [-3.0, 1.0]], name="K3")


def resolve_cone(spec: str | ConeSpec | dict, m: int) -> PolyhedralCone:
    """Builder name ("K1", "K2", "K3") or inline normals, checked against R^m."""
    if isinstance(spec, dict):
        spec = ConeSpec.model_validate(spec)
    if isinstance(spec, ConeSpec):
        if spec.dim != m:
            raise ContractViolation(f"cone dimension {spec.dim} does not match m = {m}")
        return make_cone(spec.normals, name=spec.name)
    if spec == "K1":
        return cone_k1(m)
    if spec in ("K2", "K3"):
        if m != 2:
            raise ContractViolation(f"{spec} is a cone in R^2, problem has m = {m}")
        return cone_k2() if spec == "K2" else cone_k3()
    raise ContractViolation(f"unknown cone '{spec}'")


# --- Catalog plumbing ---


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    variants: list[tuple[int, int]]
    domain: Callable[[int], tuple[np.ndarray, np.ndarray]]
    build: Callable[[int, int], SetMapProblem] = field(repr=False)
    note: str = ""

    def box(self, n: int) -> list[tuple[float, float]]:
        lower, upper = self.domain(n)
        return [(float(lo), float(hi)) for lo, hi in zip(lower, upper)]


def _box(lo: float | list[float], hi: float | list[float]) -> Callable[[int], tuple[np.ndarray, np.ndarray]]:
    def domain(n: int) -> tuple[np.ndarray, np.ndarray]:
        lower = np.broadcast_to(np.asarray(lo, dtype=float), (n,)).copy()
        upper = np.broadcast_to(np.asarray(hi, dtype=float), (n,)).copy()
        return lower, upper

    return domain


def _grid(phis: np.ndarray, psis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(phi_i, psi_i) for i = 10(j - 1) + l, j, l in [10]."""
    return np.repeat(phis, len(psis)), np.tile(psis, len(phis))


STEPS = np.arange(10)
GRID_PI5 = _grid(PI / 5 * STEPS, PI / 5 * STEPS)
INDEX = np.arange(1, P + 1)


def _pad(columns: list[np.ndarray], m: int) -> np.ndarray:
    shifts = np.zeros((P, m))
    for col, values in enumerate(columns[:m]):
        shifts[:, col] = values
    return shifts


def _additive(
    name: str,
    n: int,
    m: int,
    domain: Callable[[int], tuple[np.ndarray, np.ndarray]],
    base: Callable[[np.ndarray], np.ndarray],
    shifts: np.ndarray,
    jac: Callable[[np.ndarray], np.ndarray] | None = None,
    hess: Callable[[np.ndarray], np.ndarray] | None = None,
) -> SetMapProblem:
    shifts = np.asarray(shifts, dtype=float)
    lower, upper = domain(n)
    return SetMapProblem(
        name=name,
        n=n,
        m=m,
        p=shifts.shape[0],
        value=lambda i, x: base(x) + shifts[i - 1],
        init_lower=lower,
        init_upper=upper,
        jacobian_oracle=(lambda i, x: jac(x)) if jac is not None else None,
        hessian_oracle=(lambda i, x: hess(x)) if hess is not None else None,
        batch_value=lambda x: base(x)[None, :] + shifts,
    )


# --- ZDT family ---


C16 = np.cos(4 * PI * INDEX / 100) ** 16
TURN = 2 * PI * INDEX / 100


def _build_zdt1(n: int, m: int) -> SetMapProblem:
    def base(x):
        g = 1.0 + 9.0 * np.sum(x[1:])
        return np.array([x[0], g * (1.0 - np.sqrt(np.abs(x[0] / g)))])

    shifts = _pad([(0.02 + 0.02 * C16) * np.cos(TURN), 0.15 + 0.15 * C16 * np.sin(TURN)], 2)
    return _additive("GGTZ1-ZDT1", n, m, CATALOG["GGTZ1-ZDT1"].domain, base, shifts)


def _build_zdt4(n: int, m: int) -> SetMapProblem:
    def base(x):
        tail = x[1:]
        g = 1.0 + 10.0 * (n - 1) + np.sum(tail**2 - 10.0 * np.cos(4 * PI * tail))
        return np.array([x[0], g * (1.0 - np.sqrt(np.abs(x[0] / g)))])

    shifts = _pad([1 + C16 * np.cos(TURN), 1 + C16 * np.sin(TURN)], 2)
    return _additive("GGTZ2-ZDT4", n, m, CATALOG["GGTZ2-ZDT4"].domain, base, shifts)


# --- DTLZ family ---


def _dtlz_g_rastrigin(tail: np.ndarray) -> float:
    return 100.0 * (tail.size + np.sum((tail - 0.5) ** 2 - np.cos(20 * PI * (tail - 0.5))))


def _spherical(radius: float, angles: np.ndarray, m: int) -> np.ndarray:
    """radius * (prod cos, ..., cos * sin, sin) over the m - 1 angles."""
    cos, sin = np.cos(angles), np.sin(angles)
    out = np.empty(m)
    for j in range(m):
        head = m - 1 - j
        out[j] = radius * np.prod(cos[:head]) * (sin[head] if j > 0 else 1.0)
    return out


def _build_dtlz1(n: int, m: int) -> SetMapProblem:
    def base(x):
        g = _dtlz_g_rastrigin(x[m - 1 :])
        out = np.empty(m)
        for j in range(m):
            head = m - 1 - j
            out[j] = 0.5 * (1.0 + g) * np.prod(x[:head]) * ((1.0 - x[head]) if j > 0 else 1.0)
        return out

    phi, _ = GRID_PI5
    psi = np.tile(PI / 5 * STEPS + PI / 10, 10)
    shifts = _pad(
        [
            np.cos(phi) * np.sin(psi),
            np.sin(phi) * np.sin(psi),
            np.cos(psi) + np.log(np.abs(np.tan(psi / 2))) + 0.2 * phi,
        ],
        m,
    )
    return _additive("GGTZ3-DTLZ1", n, m, CATALOG["GGTZ3-DTLZ1"].domain, base, shifts)


def _build_dtlz3(n: int, m: int) -> SetMapProblem:
    def base(x):
        g = _dtlz_g_rastrigin(x[m - 1 :])
        return _spherical(1.0 + g, x[: m - 1] * PI / 2, m)

    phi, psi = GRID_PI5
    sech = 1.0 / np.cosh(phi)
    shifts = _pad([sech * np.cos(psi), sech * np.sin(psi), phi - np.tanh(phi)], m)
    return _additive("GGTZ4-DTLZ3", n, m, CATALOG["GGTZ4-DTLZ3"].domain, base, shifts)


def _build_dtlz5(n: int, m: int) -> SetMapProblem:
    def base(x):
        g = float(np.sum((x[m - 1 :] - 0.5) ** 2))
        theta = np.empty(m - 1)
        theta[0] = x[0]
        theta[1:] = (1.0 + g * x[1 : m - 1]) / (2.0 * (1.0 + g))
        return _spherical(1.0 + g, theta * PI / 2, m)

    phi, psi = GRID_PI5
    lam = PI + (psi - PI) ** 2
    shifts = _pad([5 * psi / (2 * PI), lam * np.cos(phi) / 10, lam * np.sin(phi) / 10], m)
    return _additive("GGTZ6-DTLZ5", n, m, CATALOG["GGTZ6-DTLZ5"].domain, base, shifts)


# --- Smooth rows with analytic derivatives ---


def _build_fdsa(n: int, m: int) -> SetMapProblem:
    k = np.arange(1, n + 1, dtype=float)
    w = k * (n - k + 1) / (n * (n + 1))

    def base(x):
        return np.array(
            [
                np.sum(k * (x - k) ** 4) / n**2,
                np.exp(np.sum(x) / n) + x @ x,
                np.sum(w * np.exp(-x)),
            ]
        )

    def jac(x):
        e = np.exp(np.sum(x) / n)
        return np.vstack([4 * k * (x - k) ** 3 / n**2, e / n + 2 * x, -w * np.exp(-x)])

    def hess(x):
        e = np.exp(np.sum(x) / n)
        return np.stack(
            [
                np.diag(12 * k * (x - k) ** 2 / n**2),
                np.full((n, n), e / n**2) + 2 * np.eye(n),
                np.diag(w * np.exp(-x)),
            ]
        )

    phi, psi = GRID_PI5
    shifts = _pad([1 + np.cos(phi) * np.cos(psi), 1 + np.cos(phi) * np.sin(psi), np.sin(phi)], 3)
    return _additive("GGTZ5-FDSa", n, m, CATALOG["GGTZ5-FDSa"].domain, base, shifts, jac, hess)


def _build_dgo1(n: int, m: int) -> SetMapProblem:
    i = INDEX
    shifts = _pad([np.sin(PI * i / 50 + np.cos(PI * i / 50)), np.cos(PI * i / 50 + np.sin(PI * i / 50))], 2)
    return _additive(
        "GGTZ7-DGO1",
        n,
        m,
        CATALOG["GGTZ7-DGO1"].domain,
        lambda x: np.array([np.sin(x[0]), np.sin(x[0] + 0.7)]),
        shifts,
        lambda x: np.array([[np.cos(x[0])], [np.cos(x[0] + 0.7)]]),
        lambda x: np.array([[[-np.sin(x[0])]], [[-np.sin(x[0] + 0.7)]]]),
    )


def _build_dgo2(n: int, m: int) -> SetMapProblem:
    i = INDEX
    shifts = _pad([np.sin(PI * i / 50 + np.cos(PI * i / 50)), np.cos(PI * i / 50 + np.sin(2 * PI * i / 50))], 2)
    # derivatives are unbounded at |x| = 9; finite differences only
    return _additive(
        "GGTZ8-DGO2",
        n,
        m,
        CATALOG["GGTZ8-DGO2"].domain,
        lambda x: np.array([x[0] ** 2, 9.0 - np.sqrt(np.abs(81.0 - x[0] ** 2))]),
        shifts,
    )


def _build_hil(n: int, m: int) -> SetMapProblem:
    def parts(x):
        radius = 1.0 + 0.5 * np.cos(2 * PI * x[0])
        angle = PI / 180 * (45 + 40 * np.sin(2 * PI * x[0]) + 25 * np.sin(2 * PI * x[1]))
        return radius, angle

    def base(x):
        radius, angle = parts(x)
        return radius * np.array([np.cos(angle), np.sin(angle)])

    def jac(x):
        radius, angle = parts(x)
        d_radius = np.array([-PI * np.sin(2 * PI * x[0]), 0.0])
        d_angle = PI / 180 * np.array([80 * PI * np.cos(2 * PI * x[0]), 50 * PI * np.cos(2 * PI * x[1])])
        return np.vstack(
            [
                d_radius * np.cos(angle) - radius * np.sin(angle) * d_angle,
                d_radius * np.sin(angle) + radius * np.cos(angle) * d_angle,
            ]
        )

    i = INDEX
    s = np.sin(PI * i / 25)
    c = 10 * ((9 + np.exp(s) - s + 2 * np.cos(2 * PI * i / 25) ** 2) / 128)
    shifts = _pad([c * np.cos(PI * i / 50), c * np.sin(PI * i / 50)], 2)
    return _additive("GGTZ9-Hil", n, m, CATALOG["GGTZ9-Hil"].domain, base, shifts, jac)


def _build_jos1a(n: int, m: int) -> SetMapProblem:
    i = INDEX
    shifts = _pad([0.1 * np.cos(PI * i / 50), 0.1 * np.sin(PI * i / 50)], 2)
    return _additive(
        "GGTZ10-JOS1a",
        n,
        m,
        CATALOG["GGTZ10-JOS1a"].domain,
        lambda x: np.array([x @ x / n, (x - 2) @ (x - 2) / n]),
        shifts,
        lambda x: np.vstack([2 * x / n, 2 * (x - 2) / n]),
        lambda x: np.stack([2 * np.eye(n) / n, 2 * np.eye(n) / n]),
    )


def _build_rosenbrock(n: int, m: int) -> SetMapProblem:
    r = 16.0

    def base(x):
        return np.array([100 * (x[k + 1] - x[k] ** 2) ** 2 + (x[k + 1] - 1) ** 2 for k in range(m)])

    def jac(x):
        out = np.zeros((m, n))
        for k in range(m):
            out[k, k] = -400 * x[k] * (x[k + 1] - x[k] ** 2)
            out[k, k + 1] = 200 * (x[k + 1] - x[k] ** 2) + 2 * (x[k + 1] - 1)
        return out

    def hess(x):
        out = np.zeros((m, n, n))
        for k in range(m):
            out[k, k, k] = -400 * (x[k + 1] - 3 * x[k] ** 2)
            out[k, k, k + 1] = out[k, k + 1, k] = -400 * x[k]
            out[k, k + 1, k + 1] = 202.0
        return out

    phi, psi = GRID_PI5
    shifts = _pad(
        [
            r**2 * np.cos(phi) * np.cos(psi) * np.sin(psi),
            r**2 * np.cos(phi) * np.sin(psi) * np.sin(psi),
            r**2 * np.cos(phi) * np.sin(psi) * np.cos(psi) ** 2,
        ],
        3,
    )
    return _additive("GGTZ11-Rosenbrock", n, m, CATALOG["GGTZ11-Rosenbrock"].domain, base, shifts, jac, hess)


GRID_LOG = _grid(2 * PI / 5 * STEPS, 0.01 + 0.098 * STEPS)


def _build_brown_dennis(n: int, m: int) -> SetMapProblem:
    ts = np.array([1, 2, 3]) / 5
    # row 3 pairs x1 with x3
    second = [1, 1, 2]

    def grads(x):
        rows = []
        for t, col in zip(ts, second):
            du = np.zeros(n)
            du[0], du[col] = 1.0, t
            dv = np.array([0.0, 0.0, 1.0, np.sin(t)])
            u = x[0] + t * x[col] - np.exp(t)
            v = x[2] + x[3] * np.sin(t) - np.cos(t)
            rows.append((u, v, du, dv))
        return rows

    def base(x):
        return np.array([u**2 + v**2 for u, v, _, _ in grads(x)])

    def jac(x):
        return np.vstack([2 * u * du + 2 * v * dv for u, v, du, dv in grads(x)])

    def hess(x):
        return np.stack([2 * (np.outer(du, du) + np.outer(dv, dv)) for _, _, du, dv in grads(x)])

    phi, psi = GRID_LOG
    shifts = _pad(
        [np.cos(phi) * np.sin(psi), np.sin(phi) * np.sin(psi), np.cos(psi) + np.log(np.tan(psi / 2)) + 0.5 * phi],
        3,
    )
    return _additive("GGTZ12-BrownDennis", n, m, CATALOG["GGTZ12-BrownDennis"].domain, base, shifts, jac, hess)


def _build_trigonometric(n: int, m: int) -> SetMapProblem:
    def residuals(x):
        partial = np.cumsum(x)
        k = np.arange(1, n + 1)
        return k - np.cos(partial) + k * (1 - np.cos(x)) - np.sin(x)

    def residual_jac(x):
        partial = np.cumsum(x)
        k = np.arange(1, n + 1)
        out = np.tril(np.ones((n, n))) * np.sin(partial)[:, None]
        out[np.diag_indices(n)] += k * np.sin(x) - np.cos(x)
        return out

    def base(x):
        u = residuals(x)
        return np.concatenate([u[:3] ** 2, u[3:]])

    def jac(x):
        u, du = residuals(x), residual_jac(x)
        return np.vstack([2 * u[:3, None] * du[:3], du[3:]])

    phi, psi = GRID_LOG
    shifts = _pad(
        [np.cos(phi) * np.sin(psi), np.sin(phi) * np.sin(psi), np.cos(psi) + np.log(np.tan(psi / 2)) + 0.2 * phi],
        4,
    )
    return _additive("GGTZ13-Trigonometric", n, m, CATALOG["GGTZ13-Trigonometric"].domain, base, shifts, jac)


def _build_das_dennis(n: int, m: int) -> SetMapProblem:
    def base(x):
        return np.array([x @ x, 3 * x[0] + 2 * x[1] - x[2] / 3 + 0.01 * (x[3] - x[4]) ** 3])

    def jac(x):
        d = x[3] - x[4]
        return np.vstack([2 * x, [3.0, 2.0, -1.0 / 3, 0.03 * d**2, -0.03 * d**2]])

    def hess(x):
        d = x[3] - x[4]
        second = np.zeros((n, n))
        second[3:, 3:] = 0.06 * d * np.array([[1.0, -1.0], [-1.0, 1.0]])
        return np.stack([2 * np.eye(n), second])

    i = INDEX
    c = np.sin(i * PI / 50) + np.cos(i * PI / 50)
    return _additive("GGTZ14-DasDennis", n, m, CATALOG["GGTZ14-DasDennis"].domain, base, _pad([c, c], 2), jac, hess)


def _build_sphere(n: int, m: int) -> SetMapProblem:
    def g(t):
        return (t - 0.5) ** 2

    def base(x):
        u = PI * x[0] / 2
        v = PI * (1 + 2 * g(x[2]) * x[1]) / (4 * (1 + g(np.sqrt(x @ x))))
        radius = 1 + g(x[2])
        return radius * np.array([np.cos(u) * np.cos(v), np.cos(u) * np.sin(v), np.sin(u)])

    phi, psi = _grid(PI / 10 * STEPS, PI / 5 * STEPS)
    shifts = _pad([np.cos(phi), np.cos(psi) * np.sin(phi), np.sin(psi) * np.sin(phi)], 3) / 16
    return _additive("GGTZ17-Sphere", n, m, CATALOG["GGTZ17-Sphere"].domain, base, shifts)


# --- Rows whose x-terms depend on i ---


def _build_bqt1(n: int, m: int) -> SetMapProblem:
    t = (np.arange(1, P + 1) - 1) / (P - 1)
    tilt = 1 - 2 * t

    def batch(x):
        c2 = np.cos(x[0]) ** 2
        return np.column_stack([np.full(P, x[0] + c2), x[0] / 2 * np.sin(x[0]) + c2 * tilt])

    def jac(i, x):
        s2 = np.sin(2 * x[0])
        return np.array([[1 - s2], [0.5 * np.sin(x[0]) + x[0] / 2 * np.cos(x[0]) - s2 * tilt[i - 1]]])

    def hess(i, x):
        c2x = np.cos(2 * x[0])
        return np.array(
            [[[-2 * c2x]], [[np.cos(x[0]) - x[0] / 2 * np.sin(x[0]) - 2 * c2x * tilt[i - 1]]]]
        )

    lower, upper = CATALOG["GGCZ15-BQT1"].domain(n)
    return SetMapProblem(
        name="GGCZ15-BQT1",
        n=n,
        m=m,
        p=P,
        value=lambda i, x: batch(x)[i - 1],
        init_lower=lower,
        init_upper=upper,
        jacobian_oracle=jac,
        hessian_oracle=hess,
        batch_value=batch,
    )


def _bqt2_family(name: str, period1: float, period2: float) -> Callable[[int, int], SetMapProblem]:
    """
    f^i(x) = ( e^{x1/2} cos x2 + x1 cos x2 A_i - x2 sin x2 B_i,
               e^{x2/20} sin x1 + x1 sin x2 C_i + x2 cos x2 D_i )
    with A = sin(a), B = cos^3(a), a = pi (i-1) / period1 and
    C = sin^3(b), D = cos(b), b = pi (i-1) / period2.
    """
    a = PI * np.arange(P) / period1
    b = PI * np.arange(P) / period2
    A, B = np.sin(a), np.cos(a) ** 3
    C, D = np.sin(b) ** 3, np.cos(b)

    def batch(x):
        x1, x2 = x
        e1, e2 = np.exp(x1 / 2), np.exp(x2 / 20)
        return np.column_stack(
            [
                e1 * np.cos(x2) + x1 * np.cos(x2) * A - x2 * np.sin(x2) * B,
                e2 * np.sin(x1) + x1 * np.sin(x2) * C + x2 * np.cos(x2) * D,
            ]
        )

    def jac(i, x):
        x1, x2 = x
        e1, e2 = np.exp(x1 / 2), np.exp(x2 / 20)
        k = i - 1
        return np.array(
            [
                [
                    0.5 * e1 * np.cos(x2) + A[k] * np.cos(x2),
                    -e1 * np.sin(x2) - A[k] * x1 * np.sin(x2) - B[k] * (np.sin(x2) + x2 * np.cos(x2)),
                ],
                [
                    e2 * np.cos(x1) + C[k] * np.sin(x2),
                    e2 / 20 * np.sin(x1) + C[k] * x1 * np.cos(x2) + D[k] * (np.cos(x2) - x2 * np.sin(x2)),
                ],
            ]
        )

    def hess(i, x):
        x1, x2 = x
        e1, e2 = np.exp(x1 / 2), np.exp(x2 / 20)
        k = i - 1
        h1_12 = -0.5 * e1 * np.sin(x2) - A[k] * np.sin(x2)
        h1_22 = -e1 * np.cos(x2) - A[k] * x1 * np.cos(x2) - B[k] * (2 * np.cos(x2) - x2 * np.sin(x2))
        h2_12 = e2 / 20 * np.cos(x1) + C[k] * np.cos(x2)
        h2_22 = e2 / 400 * np.sin(x1) - C[k] * x1 * np.sin(x2) - D[k] * (2 * np.sin(x2) + x2 * np.cos(x2))
        return np.array(
            [
                [[0.25 * e1 * np.cos(x2), h1_12], [h1_12, h1_22]],
                [[-e2 * np.sin(x1), h2_12], [h2_12, h2_22]],
            ]
        )

    def build(n: int, m: int) -> SetMapProblem:
        lower, upper = CATALOG[name].domain(n)
        return SetMapProblem(
            name=name,
            n=n,
            m=m,
            p=P,
            value=lambda i, x: batch(x)[i - 1],
            init_lower=lower,
            init_upper=upper,
            jacobian_oracle=jac,
            hessian_oracle=hess,
            batch_value=batch,
        )

    return build


# --- Small reference instances ---


def _build_note(n: int, m: int) -> SetMapProblem:
    """
    Single-component instance where a naive ratio of oriented distances
    accepts a step that increases the first component.
    """

    def value(i, x):
        v = x[0]
        return np.array([2 * np.sin(v) - 8 * np.cos(v) - 1e4 * v * np.sin(v**2), np.sin(v) - 6.4 * np.cos(v)])

    def jac(i, x):
        v = x[0]
        return np.array(
            [
                [2 * np.cos(v) + 8 * np.sin(v) - 1e4 * (np.sin(v**2) + 2 * v**2 * np.cos(v**2))],
                [np.cos(v) + 6.4 * np.sin(v)],
            ]
        )

    def hess(i, x):
        v = x[0]
        return np.array(
            [
                [[-2 * np.sin(v) + 8 * np.cos(v) - 1e4 * (6 * v * np.cos(v**2) - 4 * v**3 * np.sin(v**2))]],
                [[-np.sin(v) + 6.4 * np.cos(v)]],
            ]
        )

    lower, upper = CATALOG["NOTE-RATIO"].domain(n)
    return SetMapProblem("NOTE-RATIO", n, m, 1, value, lower, upper, jac, hess)


def _build_biquadratic(n: int, m: int) -> SetMapProblem:
    """f(x) = ((x1 - 1)^2 + x2^2, x1^2 + (x2 - 1)^2), a single convex component."""

    def value(i, x):
        return np.array([(x[0] - 1) ** 2 + x[1] ** 2, x[0] ** 2 + (x[1] - 1) ** 2])

    def jac(i, x):
        return 2 * np.array([[x[0] - 1, x[1]], [x[0], x[1] - 1]])

    def hess(i, x):
        return np.stack([2 * np.eye(2), 2 * np.eye(2)])

    lower, upper = CATALOG["BIQUAD"].domain(n)
    return SetMapProblem("BIQUAD", n, m, 1, value, lower, upper, jac, hess)


CATALOG: dict[str, ProblemSpec] = {
    spec.name: spec
    for spec in [
        ProblemSpec("GGTZ1-ZDT1", [(2, 2), (5, 2), (8, 2), (10, 2)], _box(0.0, 1.0), _build_zdt1),
        ProblemSpec("GGTZ2-ZDT4", [(10, 2)], _box([0.0] + [-5.0] * 9, [1.0] + [5.0] * 9), _build_zdt4),
        ProblemSpec("GGTZ3-DTLZ1", [(6, 4)], _box(0.0, 1.0), _build_dtlz1),
        ProblemSpec("GGTZ4-DTLZ3", [(5, 4)], _box(0.0, 1.0), _build_dtlz3),
        ProblemSpec("GGTZ5-FDSa", [(2, 3)], _box(-2.0, 2.0), _build_fdsa),
        ProblemSpec("GGTZ6-DTLZ5", [(3, 3), (5, 3), (7, 5)], _box(0.0, 1.0), _build_dtlz5),
        ProblemSpec("GGTZ7-DGO1", [(1, 2)], _box(-4 * PI, 4 * PI), _build_dgo1),
        ProblemSpec("GGTZ8-DGO2", [(1, 2)], _box(-9.0, 9.0), _build_dgo2, note="box clipped to |x| <= 9"),
        ProblemSpec("GGTZ9-Hil", [(2, 2)], _box(0.0, 1.0), _build_hil),
        ProblemSpec("GGTZ10-JOS1a", [(5, 2)], _box(-100.0, 100.0), _build_jos1a),
        ProblemSpec("GGTZ11-Rosenbrock", [(4, 3)], _box(-2.0, 2.0), _build_rosenbrock),
        ProblemSpec(
            "GGTZ12-BrownDennis", [(4, 3)], _box([-25.0, -5.0, -5.0, -1.0], [25.0, 5.0, 5.0, 1.0]), _build_brown_dennis
        ),
        ProblemSpec("GGTZ13-Trigonometric", [(4, 4)], _box(-1.0, 1.0), _build_trigonometric),
        ProblemSpec("GGTZ14-DasDennis", [(5, 2)], _box(-20.0, 20.0), _build_das_dennis),
        ProblemSpec("GGCZ15-BQT1", [(1, 2)], _box(2.0, 10.0), _build_bqt1),
        ProblemSpec("GGCZ16-BQT2", [(2, 2)], _box(-20.0, 20.0), _bqt2_family("GGCZ16-BQT2", 50, 50)),
        ProblemSpec("GGTZ17-Sphere", [(3, 3)], _box(0.0, 1.0), _build_sphere),
        ProblemSpec(
            "EX-BQT2-MOD",
            [(2, 2)],
            _box(-20.0, 20.0),
            _bqt2_family("EX-BQT2-MOD", 50, 100),
            note="BQT2 with period 100 in the second component",
        ),
        ProblemSpec("NOTE-RATIO", [(1, 2)], _box(-1.0, 1.0), _build_note, note="p = 1; naive ratio counterexample"),
        ProblemSpec("BIQUAD", [(2, 2)], _box(-3.0, 3.0), _build_biquadratic, note="p = 1; componentwise quadratic"),
    ]
}


def catalog() -> list[ProblemSpec]:
    return list(CATALOG.values())


def instantiate(name: str, n: int | None = None, m: int | None = None) -> SetMapProblem:
    """
    Build a catalog problem. n and m default to the first listed variant;
    any other combination must be one of the listed variants.
    """
    spec = CATALOG.get(name)
    if spec is None:
        raise UnknownProblemError(f"unknown problem '{name}'")
    default_n, default_m = spec.variants[0]
    if n is None and m is None:
        n, m = default_n, default_m
    elif n is None or m is None:
        matches = [v for v in spec.variants if (n is None or v[0] == n) and (m is None or v[1] == m)]
        if not matches:
            raise UnknownProblemError(f"{name} has no variant with n={n}, m={m}; variants: {spec.variants}")
        n, m = matches[0]
    if (n, m) not in spec.variants:
        raise UnknownProblemError(f"{name} has no variant (n={n}, m={m}); variants: {spec.variants}")
    logger.debug(f"Instantiating {name} with n={n}, m={m}")
    return spec.build(n, m)
