"""Pydantic schemas for solver configuration, run files and API payloads."""

from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


# --- Solver Settings ---


class SubproblemSettings(BaseModel):
    """Multistart + refinement settings for the trust-region min-max subproblem."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    seed: int = 0
    n_random: int = Field(64, ge=0, description="Random ball points added to the candidate set")
    n_starts: int = Field(4, ge=1, description="Best candidates refined by projected subgradient")
    refine_iterations: int = Field(200, ge=0)
    step_scale: float = Field(0.5, gt=0, description="Subgradient step c/sqrt(k) uses c = step_scale * radius")
    active_tol: float = Field(1e-10, ge=0)
    polish: bool = Field(True, description="Finish with an SLSQP solve of the epigraph form")


class TrustRegionConfig(BaseModel):
    """Trust-region parameters. Defaults are the values used in the reported experiments."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    omega0: float = Field(1.0, gt=0)
    omega_max: float = Field(20.0, gt=0)
    epsilon: float = Field(1e-3, gt=0)
    eta1: float = 0.001
    eta2: float = 0.75
    gamma1: float = 0.4
    gamma2: float = 0.9
    max_iter: int = Field(100, ge=0)
    partition_cap: int = Field(1024, ge=1)
    partition_rule: Literal["min", "wmin"] = "min"
    dedup_tol: float = Field(1e-9, gt=0)
    subproblem: SubproblemSettings = SubproblemSettings()

    @model_validator(mode="after")
    def check_ranges(self) -> "TrustRegionConfig":
        """Enforce 0 < eta1 < eta2 < 1, 0 < gamma1 <= gamma2 < 1, omega0 <= omega_max."""
        if not 0 < self.eta1 < self.eta2 < 1:
            raise ValueError("eta1 and eta2 must satisfy 0 < eta1 < eta2 < 1")
        if not 0 < self.gamma1 <= self.gamma2 < 1:
            raise ValueError("gamma1 and gamma2 must satisfy 0 < gamma1 <= gamma2 < 1")
        if self.omega0 > self.omega_max:
            raise ValueError("omega0 must not exceed omega_max")
        return self


class SteepestDescentParams(BaseModel):
    """Parameters of the first-order steepest-descent baseline."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    armijo_rho: float = Field(0.0001, gt=0, lt=1)
    sigma: float = Field(0.1, gt=0, lt=1, description="Accepted for CGM parity; unused by SD")
    beta_sd: float = Field(0.0001, gt=0)
    nu: float = Field(0.5, gt=0, lt=1)
    max_iter: int = Field(100, ge=0)
    epsilon: float = Field(1e-3, gt=0)
    max_backtracks: int = Field(50, ge=1)
    partition_cap: int = Field(1024, ge=1)
    dedup_tol: float = Field(1e-9, gt=0)


# --- Run Files ---


class ConeSpec(BaseModel):
    """Inline cone: facet normals of K = {y : <w, y> >= 0}."""

    model_config = ConfigDict(extra="forbid")

    dim: int = Field(..., ge=1)
    normals: list[list[float]] = Field(..., min_length=1)
    name: str = ""

    @model_validator(mode="after")
    def check_lengths(self) -> "ConeSpec":
        """Every normal must have length dim."""
        if any(len(w) != self.dim for w in self.normals):
            raise ValueError(f"every normal must have length {self.dim}")
        return self


class RunConfigFile(BaseModel):
    """A solve or bench request as stored in a JSON run file."""

    model_config = ConfigDict(extra="forbid")

    problem: str
    n: int | None = Field(None, ge=1)
    m: int | None = Field(None, ge=1)
    cone: Literal["K1", "K2", "K3"] | ConeSpec = "K1"
    solver: str = "trm"
    x0: list[float] | str = "random:1"
    trust_region: TrustRegionConfig = TrustRegionConfig()
    steepest_descent: SteepestDescentParams = SteepestDescentParams()
    seed: int | None = None
    trace_jsonl: Path | None = None
    trace_csv: Path | None = None
    records_csv: Path | None = None

    @field_validator("x0")
    @classmethod
    def validate_x0(cls, v: list[float] | str) -> list[float] | str:
        """Accept an explicit point or 'random:<count>'."""
        if isinstance(v, str):
            head, _, count = v.partition(":")
            if head != "random" or not count.isdigit() or int(count) < 1:
                raise ValueError("x0 must be a list of numbers or 'random:<count>'")
        return v

    @property
    def random_count(self) -> int | None:
        if isinstance(self.x0, str):
            return int(self.x0.partition(":")[2])
        return None


class ProblemRef(BaseModel):
    """One catalog problem in a batch, with the cone it is solved under."""

    model_config = ConfigDict(extra="forbid")

    name: str
    n: int | None = Field(None, ge=1)
    m: int | None = Field(None, ge=1)
    cone: Literal["K1", "K2", "K3"] | ConeSpec = "K1"


class BenchConfigFile(BaseModel):
    """A batch experiment: every solver starts from the same n_inits points per problem."""

    model_config = ConfigDict(extra="forbid")

    problems: list[ProblemRef] = Field(..., min_length=1)
    solvers: list[str] = Field(["trm", "sd"], min_length=1)
    n_inits: int = Field(100, ge=1)
    trust_region: TrustRegionConfig = TrustRegionConfig()
    steepest_descent: SteepestDescentParams = SteepestDescentParams()
    seed: int | None = None
    records_csv: Path | None = None
    summary_csv: Path | None = None


# --- API Schemas ---


class ProblemInfo(BaseModel):
    """Catalog entry as listed by the CLI and the API."""

    name: str
    variants: list[tuple[int, int]]
    domain: dict[str, list[tuple[float, float]]]
    derivatives: str
    note: str = ""


class DerivativeCheckResponse(BaseModel):
    problem: str
    n: int
    m: int
    points: int
    tol: float
    max_jacobian_error: float
    max_hessian_error: float | None
    passed: bool


class SolveRequest(BaseModel):
    """POST /solve body: a run file without output paths."""

    model_config = ConfigDict(extra="forbid")

    problem: str
    n: int | None = Field(None, ge=1)
    m: int | None = Field(None, ge=1)
    cone: Literal["K1", "K2", "K3"] | ConeSpec = "K1"
    solver: str = "trm"
    x0: list[float]
    trust_region: TrustRegionConfig = TrustRegionConfig()
    steepest_descent: SteepestDescentParams = SteepestDescentParams()


class IterationOut(BaseModel):
    k: int
    status: str
    t: float
    omega: float
    step_length: float
    rho_min: float | None
    rho_max: float | None
    x: list[float]


class SolveResponse(BaseModel):
    problem: str
    solver: str
    status: str
    iterations: int
    final_x: list[float]
    final_t: float | None
    theta: float | None
    descent_violations: int
    trace: list[IterationOut]


class RunRecordIn(BaseModel):
    """One benchmark record as carried in a profile request."""

    problem: str
    solver: str
    x0: list[float] = []
    seed: int = 0
    converged: bool
    iterations: int = Field(..., ge=0)
    wall_seconds: float = Field(..., ge=0)
    avg_step_length: float = Field(..., ge=0)


class ProfileRequest(BaseModel):
    records: list[RunRecordIn] = Field(..., min_length=1)
    metric: Literal["iterations", "wall_seconds", "reciprocal_step"] = "iterations"
    common_only: bool = True


class ProfileResponse(BaseModel):
    metric: str
    solvers: list[str]
    problems: list[str]
    tau: list[float]
    curves: dict[str, list[float]]
    excluded: int
    extra: dict[str, Any] = {}
