"""Iteration traces shared by every solver, and their JSONL / CSV / image-point exports."""

import csv
import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["k", "status", "t", "omega", "step_length", "rho_min", "rho_max", "wall_ms"]


class StepStatus(str, Enum):
    """Per-iteration classification."""

    SUCCESSFUL = "Successful"
    VERY_SUCCESSFUL = "VerySuccessful"
    UNSUCCESSFUL = "Unsuccessful"
    CONVERGED = "Converged"
    # first-order baselines only report acceptance
    ACCEPTED = "Accepted"
    REJECTED = "Rejected"

    @property
    def advances(self) -> bool:
        return self in (StepStatus.SUCCESSFUL, StepStatus.VERY_SUCCESSFUL, StepStatus.ACCEPTED)


class RunStatus(str, Enum):
    CONVERGED = "Converged"
    MAX_ITER = "MaxIter"
    FAILED = "Failed"  # baseline line search exhausted
    ERROR = "Error"  # oracle failure, partial trace


@dataclass
class IterationRecord:
    k: int
    x: list[float]
    omega: float
    a: tuple[int, ...]
    s: list[float]
    t: float
    rho: list[float]
    status: StepStatus
    step_length: float = 0.0
    wall_ms: float = 0.0
    minimal_values: list[list[float]] = field(default_factory=list)
    partition_size: int = 1
    truncated: bool = False
    descent: str | None = None  # lower set relation F(x_{k+1}) vs F(x_k) on accepted steps

    @property
    def rho_min(self) -> float | None:
        return min(self.rho) if self.rho else None

    @property
    def rho_max(self) -> float | None:
        return max(self.rho) if self.rho else None

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "x": self.x,
            "omega": self.omega,
            "a": list(self.a),
            "s": self.s,
            "t": self.t,
            "rho": self.rho,
            "status": self.status.value,
            "step_length": self.step_length,
            "wall_ms": self.wall_ms,
            "minimal_values": self.minimal_values,
            "partition_size": self.partition_size,
            "truncated": self.truncated,
            "descent": self.descent,
        }

    def csv_row(self) -> list:
        return [
            self.k,
            self.status.value,
            repr(self.t),
            repr(self.omega),
            repr(self.step_length),
            "" if self.rho_min is None else repr(self.rho_min),
            "" if self.rho_max is None else repr(self.rho_max),
            f"{self.wall_ms:.3f}",
        ]


@dataclass
class RunResult:
    """Outcome of one solver run from one initial point."""

    problem: str
    solver: str
    x0: list[float]
    x: list[float]
    status: RunStatus
    trace: list[IterationRecord]
    message: str = ""
    wall_seconds: float = 0.0
    descent_violations: int = 0

    @property
    def converged(self) -> bool:
        return self.status is RunStatus.CONVERGED

    @property
    def iterations(self) -> int:
        """Index k of the last iteration (the converged one, or max_iter)."""
        if not self.trace:
            return 0
        last = self.trace[-1]
        return last.k if self.converged else last.k + 1

    @property
    def final_t(self) -> float | None:
        return self.trace[-1].t if self.trace else None

    @property
    def accepted_steps(self) -> list[IterationRecord]:
        return [r for r in self.trace if r.status.advances]

    @property
    def avg_step_length(self) -> float:
        steps = self.accepted_steps
        if not steps:
            return 0.0
        return sum(r.step_length for r in steps) / len(steps)


def write_jsonl(result: RunResult, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        for record in result.trace:
            fh.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")
    logger.info(f"Trace written to {path}")
    return path


def write_csv(result: RunResult, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for record in result.trace:
            writer.writerow(record.csv_row())
    logger.info(f"Trace CSV written to {path}")
    return path


def write_image_points(result: RunResult, path: Path | str) -> Path:
    """Minimal values of F(x_k) per iteration, one blank-line separated block each."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    for record in result.trace:
        lines.append(f"# k={record.k} status={record.status.value}")
        lines.extend(" ".join(repr(c) for c in v) for v in record.minimal_values)
        lines.append("")
    path.write_text("\n".join(lines) + "\n")
    return path


def read_jsonl(path: Path | str) -> list[dict]:
    return [json.loads(line) for line in Path(path).read_text().splitlines() if line.strip()]
