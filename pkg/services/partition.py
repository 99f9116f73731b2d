"""Minimal values of F(x), their index sets and the partition set P_x."""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Iterator, Literal, NamedTuple

import numpy as np

from services.cone import PolyhedralCone, min_elements, wmin_elements
from services.problem import SetMapProblem, evaluate_all

logger = logging.getLogger(__name__)

DEFAULT_DEDUP_TOL = 1e-9
DEFAULT_PARTITION_CAP = 1024

PartitionRule = Literal["min", "wmin"]


@dataclass(frozen=True, order=True)
class PartitionElement:
    """One representative component index per minimal value, a = (a_1, ..., a_omega)."""

    indices: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices)


@dataclass(frozen=True, eq=False)
class PartitionView:
    """Minimal values v_1..v_omega of F(x) and the index sets I_{v_j}(x)."""

    x: np.ndarray
    values: np.ndarray  # (p, m), row i-1 = f^i(x)
    minimal_values: list[np.ndarray]
    index_sets: list[tuple[int, ...]]
    cap: int
    truncated: bool

    @property
    def omega(self) -> int:
        return len(self.minimal_values)

    @property
    def size(self) -> int:
        """|P_x| = product of the index-set sizes (may exceed the cap)."""
        return math.prod(len(s) for s in self.index_sets)

    @property
    def minimal_indices(self) -> list[int]:
        """I(x), sorted."""
        return sorted(i for s in self.index_sets for i in s)


def _cluster(values: np.ndarray, dedup_tol: float) -> list[list[int]]:
    """Group row indices (0-based) whose values agree within the scaled tolerance."""
    clusters: list[list[int]] = []
    reps: list[np.ndarray] = []
    for row, v in enumerate(values):
        for c, rep in enumerate(reps):
            tol = dedup_tol * max(1.0, float(np.max(np.abs(rep))))
            if float(np.max(np.abs(v - rep))) <= tol:
                clusters[c].append(row)
                break
        else:
            clusters.append([row])
            reps.append(v)
    return clusters


def partition_from_values(
    cone: PolyhedralCone,
    x: np.ndarray,
    values: np.ndarray,
    dedup_tol: float = DEFAULT_DEDUP_TOL,
    cap: int = DEFAULT_PARTITION_CAP,
    rule: PartitionRule = "min",
) -> PartitionView:
    """Build the partition view from already evaluated component values."""
    clusters = _cluster(values, dedup_tol)
    reps = np.vstack([values[c[0]] for c in clusters])
    keep = min_elements(cone, reps) if rule == "min" else wmin_elements(cone, reps)

    minimal_values = [reps[k].copy() for k in keep]
    index_sets = [tuple(row + 1 for row in clusters[k]) for k in keep]

    size = math.prod(len(s) for s in index_sets)
    truncated = size > cap
    if truncated:
        logger.warning(f"Partition set has {size} elements at x={np.asarray(x).tolist()}; enumerating the first {cap}")

    return PartitionView(
        x=np.array(x, dtype=float),
        values=values,
        minimal_values=minimal_values,
        index_sets=index_sets,
        cap=cap,
        truncated=truncated,
    )


def partition_at(
    problem: SetMapProblem,
    cone: PolyhedralCone,
    x,
    dedup_tol: float = DEFAULT_DEDUP_TOL,
    cap: int = DEFAULT_PARTITION_CAP,
    rule: PartitionRule = "min",
) -> PartitionView:
    """Evaluate F(x) and compute Min(F(x), K) (or WMin), I_{v_j}(x) and omega(x)."""
    v = np.asarray(x, dtype=float)
    values = evaluate_all(problem, v)
    return partition_from_values(cone, v, values, dedup_tol=dedup_tol, cap=cap, rule=rule)


def iter_partition(view: PartitionView, cap: int | None = None) -> Iterator[PartitionElement]:
    """Lexicographic enumeration of I_{v_1} x ... x I_{v_omega}, at most cap elements."""
    limit = view.cap if cap is None else cap
    product = itertools.product(*(sorted(s) for s in view.index_sets))
    for indices in itertools.islice(product, limit):
        yield PartitionElement(tuple(indices))


class PartitionEnumeration(NamedTuple):
    elements: list[PartitionElement]
    truncated: bool


def enumerate_partition(view: PartitionView, cap: int | None = None) -> PartitionEnumeration:
    """Materialize iter_partition and report whether the cap cut the product short."""
    limit = view.cap if cap is None else cap
    elements = list(iter_partition(view, limit))
    return PartitionEnumeration(elements=elements, truncated=view.size > limit)
