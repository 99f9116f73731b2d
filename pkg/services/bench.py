"""Batch experiments, convergence filtering, summaries and performance profiles."""

import csv
import json
import logging
import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal, NamedTuple

import numpy as np

from schemas import ConeSpec, ProblemRef
from services.baselines import SolverOptions, get_solver
from services.suite import instantiate, resolve_cone

logger = logging.getLogger(__name__)

Metric = Literal["iterations", "wall_seconds", "reciprocal_step"]
METRICS: tuple[str, ...] = ("iterations", "wall_seconds", "reciprocal_step")
TAU_POINTS = 200


@dataclass
class RunRecord:
    """One (problem, solver, x0) outcome; converged means stopped on |t| < epsilon."""

    problem: str
    solver: str
    x0: list[float]
    seed: int
    converged: bool
    iterations: int
    wall_seconds: float
    avg_step_length: float
    status: str = ""
    cone: str = "K1"

    @property
    def instance(self) -> tuple[str, tuple[float, ...]]:
        return self.problem, tuple(self.x0)

    def metric(self, metric: Metric) -> float:
        if metric == "iterations":
            return float(self.iterations)
        if metric == "wall_seconds":
            return self.wall_seconds
        if metric == "reciprocal_step":
            return 1.0 / self.avg_step_length if self.avg_step_length > 0 else math.inf
        raise ValueError(f"unknown metric '{metric}'")


# --- Batch runner ---


def problem_label(ref: ProblemRef) -> str:
    label = ref.name if ref.n is None else f"{ref.name}[n={ref.n},m={ref.m}]"
    cone = _cone_name(ref.cone)
    return label if cone == "K1" else f"{label}/{cone}"


def initial_points(ref: ProblemRef, n_inits: int, seed: int) -> np.ndarray:
    """
    Uniform draws from the problem's box. Each init index gets its own stream
    keyed by (seed, problem, n, m, index), so neither parallel order nor the
    cone changes a draw.
    """
    problem = instantiate(ref.name, ref.n, ref.m)
    key = zlib.crc32(f"{problem.name}:{problem.n}:{problem.m}".encode())
    rows = []
    for k in range(n_inits):
        rng = np.random.default_rng(np.random.SeedSequence([seed, key, k]))
        rows.append(problem.sample(rng, 1)[0])
    return np.vstack(rows)


def _cone_name(cone: str | ConeSpec) -> str:
    return cone if isinstance(cone, str) else (cone.name or "inline")


def _run_one(ref: ProblemRef, solver_name: str, x0: np.ndarray, options: SolverOptions, seed: int) -> RunRecord:
    label = problem_label(ref)
    try:
        problem = instantiate(ref.name, ref.n, ref.m)
        cone = resolve_cone(ref.cone, problem.m)
        result = get_solver(solver_name)(problem, cone, x0, options)
    except Exception:
        logger.exception(f"Run failed: problem={label} solver={solver_name} x0={x0.tolist()}")
        return RunRecord(
            problem=label,
            solver=solver_name,
            x0=x0.tolist(),
            seed=seed,
            converged=False,
            iterations=0,
            wall_seconds=0.0,
            avg_step_length=0.0,
            status="Error",
            cone=_cone_name(ref.cone),
        )
    return RunRecord(
        problem=label,
        solver=solver_name,
        x0=x0.tolist(),
        seed=seed,
        converged=result.converged,
        iterations=result.iterations,
        wall_seconds=result.wall_seconds,
        avg_step_length=result.avg_step_length,
        status=result.status.value,
        cone=_cone_name(ref.cone),
    )


def run_batch(
    problems: Iterable[ProblemRef | str],
    solvers: list[str],
    n_inits: int,
    options: SolverOptions | None = None,
    seed: int = 0,
    workers: int = 1,
) -> list[RunRecord]:
    """
    Run every solver from the same n_inits points of every problem.

    Records come back in (problem, init, solver) order regardless of workers.
    Individual failures are logged and recorded as nonconvergent.
    """
    if n_inits < 1:
        raise ValueError("n_inits must be >= 1")
    options = options or SolverOptions()
    refs = [ProblemRef(name=p) if isinstance(p, str) else p for p in problems]

    tasks = []
    for ref in refs:
        for x0 in initial_points(ref, n_inits, seed):
            for solver_name in solvers:
                tasks.append((ref, solver_name, x0))

    logger.info(f"Batch: {len(refs)} problems x {n_inits} inits x {len(solvers)} solvers = {len(tasks)} runs")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda task: _run_one(*task, options, seed), tasks))
    else:
        records = [_run_one(*task, options, seed) for task in tasks]

    failed = sum(not r.converged for r in records)
    logger.info(f"Batch done: {len(records) - failed} converged, {failed} not converged")
    return records


# --- Filtering and summaries ---


def common_convergence_filter(records: list[RunRecord]) -> list[RunRecord]:
    """Keep (problem, x0) groups in which every solver of the record set converged."""
    solvers = {r.solver for r in records}
    groups: dict[tuple, list[RunRecord]] = {}
    for r in records:
        groups.setdefault(r.instance, []).append(r)
    kept = []
    for group in groups.values():
        if {r.solver for r in group} == solvers and all(r.converged for r in group):
            kept.extend(group)
    logger.debug(f"Common convergence: {len(kept)} of {len(records)} records kept")
    return kept


class Stats(NamedTuple):
    min: float
    max: float
    mean: float
    median: float


@dataclass
class SummaryRow:
    problem: str
    solver: str
    runs: int
    converged: int
    nonconverged: int
    iterations: Stats | None = None
    wall_seconds: Stats | None = None
    avg_step_length: Stats | None = None

    def csv_row(self) -> list:
        row = [self.problem, self.solver, self.runs, self.converged, self.nonconverged]
        for stats in (self.iterations, self.wall_seconds, self.avg_step_length):
            row.extend([""] * 4 if stats is None else [repr(float(v)) for v in stats])
        return row


SUMMARY_COLUMNS = ["problem", "solver", "runs", "converged", "nonconverged"] + [
    f"{name}_{stat}"
    for name in ("iterations", "wall_seconds", "avg_step_length")
    for stat in ("min", "max", "mean", "median")
]


def _stats(values: list[float]) -> Stats | None:
    if not values:
        return None
    arr = np.asarray(values, dtype=float)
    return Stats(float(arr.min()), float(arr.max()), float(arr.mean()), float(np.median(arr)))


def summarize(records: list[RunRecord]) -> list[SummaryRow]:
    """Per (problem, solver) counts; statistics over convergent runs only."""
    groups: dict[tuple[str, str], list[RunRecord]] = {}
    for r in records:
        groups.setdefault((r.problem, r.solver), []).append(r)
    rows = []
    for (problem, solver), group in groups.items():
        ok = [r for r in group if r.converged]
        rows.append(
            SummaryRow(
                problem=problem,
                solver=solver,
                runs=len(group),
                converged=len(ok),
                nonconverged=len(group) - len(ok),
                iterations=_stats([r.iterations for r in ok]),
                wall_seconds=_stats([r.wall_seconds for r in ok]),
                avg_step_length=_stats([r.avg_step_length for r in ok]),
            )
        )
    return rows


# --- Performance profiles ---


@dataclass
class ProfileTable:
    """
    Ratios r[p, s] = t[p, s] / min_s t[p, s] (inf where solver s failed p) and
    the curves rho_s(tau) = |{p : r[p, s] <= tau}| / |P| on a tau grid.
    """

    metric: str
    solvers: list[str]
    problems: list[str]
    ratios: np.ndarray
    tau: np.ndarray
    curves: dict[str, np.ndarray]
    excluded: int = 0
    extra: dict = field(default_factory=dict)

    def rho(self, solver: str, tau: float) -> float:
        column = self.ratios[:, self.solvers.index(solver)]
        return float(np.mean(column <= tau)) if column.size else 0.0

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "solvers": self.solvers,
            "problems": self.problems,
            "tau": self.tau.tolist(),
            "curves": {s: c.tolist() for s, c in self.curves.items()},
            "excluded": self.excluded,
            "extra": self.extra,
        }


def _instance_label(problem: str, x0: tuple[float, ...]) -> str:
    if not x0:
        return problem
    return f"{problem}@" + ",".join(f"{v:.6g}" for v in x0)


def performance_profile(records: list[RunRecord], metric: Metric = "iterations") -> ProfileTable:
    """
    Dolan-More profile over problem instances (problem, x0).

    Nonconvergent runs get r = inf. A convergent record whose metric is not
    positive and finite (a run that converged at x0 on the iterations metric,
    or a zero average step on reciprocal_step) cannot be scored as a ratio, so
    its whole instance is dropped for every solver and counted in excluded.
    """
    if metric not in METRICS:
        raise ValueError(f"unknown metric '{metric}'; expected one of {METRICS}")
    solvers = sorted({r.solver for r in records})

    unusable = set()
    for r in records:
        if not r.converged:
            continue
        value = r.metric(metric)
        if not np.isfinite(value) or value <= 0:
            logger.warning(f"Excluding instance {_instance_label(*r.instance)}: {r.solver} has {metric} = {value}")
            unusable.add(r.instance)

    instances = [key for key in dict.fromkeys(r.instance for r in records) if key not in unusable]
    index = {key: k for k, key in enumerate(instances)}

    times = np.full((len(instances), len(solvers)), np.inf)
    for r in records:
        if r.converged and r.instance in index:
            times[index[r.instance], solvers.index(r.solver)] = r.metric(metric)

    best = np.min(times, axis=1, initial=np.inf, keepdims=True)
    with np.errstate(invalid="ignore"):
        ratios = np.where(np.isfinite(best), times / best, np.inf)

    finite = ratios[np.isfinite(ratios)]
    tau_max = float(finite.max()) if finite.size else 1.0
    grid = np.geomspace(1.0, tau_max, TAU_POINTS) if tau_max > 1.0 else np.array([1.0])
    tau = np.unique(np.concatenate([grid, finite, [1.0]]))

    curves = {
        s: (ratios[:, k][None, :] <= tau[:, None]).mean(axis=1) if len(instances) else np.zeros_like(tau)
        for k, s in enumerate(solvers)
    }
    return ProfileTable(
        metric=metric,
        solvers=solvers,
        problems=[_instance_label(p, x0) for p, x0 in instances],
        ratios=ratios,
        tau=tau,
        curves=curves,
        excluded=len(unusable),
    )


def nonconvergence_counts(records: list[RunRecord]) -> dict[str, dict[str, int]]:
    """Failures per problem and solver, the data behind a nonconvergence profile."""
    counts: dict[str, dict[str, int]] = {}
    for r in records:
        counts.setdefault(r.problem, {}).setdefault(r.solver, 0)
        if not r.converged:
            counts[r.problem][r.solver] += 1
    return counts


# --- Files ---


def _prepare(path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_records_csv(records: list[RunRecord], path: Path | str) -> Path:
    path = _prepare(path)
    width = max((len(r.x0) for r in records), default=0)
    header = ["problem", "solver"] + [f"x0_{k + 1}" for k in range(width)]
    header += ["converged", "iterations", "wall_seconds", "avg_step_length", "cone", "seed", "status"]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for r in records:
            x0 = [repr(v) for v in r.x0] + [""] * (width - len(r.x0))
            writer.writerow(
                [r.problem, r.solver, *x0]
                + [int(r.converged), r.iterations, repr(r.wall_seconds), repr(r.avg_step_length), r.cone, r.seed, r.status]
            )
    logger.info(f"Wrote {len(records)} records to {path}")
    return path


def read_records_csv(path: Path | str) -> list[RunRecord]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"records file not found: {path}")
    records = []
    with path.open(newline="") as fh:
        for row in csv.DictReader(fh):
            x0_keys = sorted((k for k in row if k.startswith("x0_")), key=lambda k: int(k[3:]))
            records.append(
                RunRecord(
                    problem=row["problem"],
                    solver=row["solver"],
                    x0=[float(row[k]) for k in x0_keys if row[k] not in ("", None)],
                    seed=int(row.get("seed") or 0),
                    converged=row["converged"].strip().lower() in ("1", "true", "yes"),
                    iterations=int(row["iterations"]),
                    wall_seconds=float(row["wall_seconds"]),
                    avg_step_length=float(row["avg_step_length"]),
                    status=row.get("status") or "",
                    cone=row.get("cone") or "K1",
                )
            )
    return records


def write_summary_csv(rows: list[SummaryRow], path: Path | str) -> Path:
    path = _prepare(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        writer.writerows(row.csv_row() for row in rows)
    return path


def write_profile_json(table: ProfileTable, path: Path | str) -> Path:
    path = _prepare(path)
    path.write_text(json.dumps(table.to_dict(), indent=2, sort_keys=True) + "\n")
    return path


def write_profile_dat(table: ProfileTable, directory: Path | str) -> list[Path]:
    """Two-column (tau, rho) gnuplot files, one per solver."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for solver, curve in table.curves.items():
        path = directory / f"profile_{table.metric}_{solver}.dat"
        lines = [f"# tau rho_{solver} ({table.metric})"]
        lines += [f"{t!r} {r!r}" for t, r in zip(table.tau.tolist(), curve.tolist())]
        path.write_text("\n".join(lines) + "\n")
        paths.append(path)
    return paths
