"""Polyhedral ordering cones, the oriented distance and cone orders on finite sets.

A cone is given by facet normals, K = {y : <w_l, y> >= 0 for all l}. The
oriented distance to -K is evaluated in the max-norm image geometry as

    delta(y) = max_l <w_l, y> / ||w_l||_1

which is exact for the nonnegative orthant and keeps the sign, Lipschitz,
homogeneity, subadditivity and monotonicity properties for every polyhedral
cone.
"""

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

logger = logging.getLogger(__name__)

# Random directions tried when looking for an interior point of K
WITNESS_RANDOM_TRIES = 1000
WITNESS_SEED = 7


class ContractViolation(ValueError):
    """Raised when an operation is called outside its preconditions."""


class SetRelation(str, Enum):
    """Outcome of comparing two finite sets under the lower set-less order."""

    STRICT_LOWER = "StrictLower"
    WEAK_LOWER = "WeakLower"
    NONE = "None"


class Position(str, Enum):
    """Location of a vector relative to the cone."""

    INTERIOR = "Interior"
    BOUNDARY = "Boundary"
    OUTSIDE = "Outside"


@dataclass(frozen=True, eq=False)
class PolyhedralCone:
    """Closed convex solid cone in halfspace form. Immutable after construction."""

    dim: int
    facet_normals: np.ndarray
    normalized_normals: np.ndarray = field(repr=False)
    interior_witness: np.ndarray = field(repr=False)
    name: str = ""

    @property
    def n_facets(self) -> int:
        return self.facet_normals.shape[0]

    def contains(self, y: Sequence[float]) -> bool:
        """True when y lies in K (boundary included)."""
        return classify(self, y) is not Position.OUTSIDE

    def to_spec(self) -> dict:
        return {"dim": self.dim, "normals": self.facet_normals.tolist(), "name": self.name}


def make_cone(normals: Sequence[Sequence[float]], name: str = "") -> PolyhedralCone:
    """
    Build a cone from its facet normals.

    Raises ContractViolation if a normal is zero, the normals do not span R^m
    (the pointedness proxy) or no interior direction can be found.
    """
    w = np.array(normals, dtype=float)
    if w.ndim != 2 or w.shape[0] < 1 or w.shape[1] < 1:
        raise ContractViolation("cone needs at least one normal vector of positive length")
    if not np.all(np.isfinite(w)):
        raise ContractViolation("cone normals must be finite")

    l1 = np.abs(w).sum(axis=1)
    if np.any(l1 == 0.0):
        raise ContractViolation("cone normals must be nonzero")

    dim = w.shape[1]
    if np.linalg.matrix_rank(w) != dim:
        raise ContractViolation(f"cone normals must span R^{dim} (rank check failed)")

    w_hat = w / l1[:, None]
    witness = _find_interior_witness(w)
    if witness is None:
        raise ContractViolation("cone has empty interior: no direction d with <w_l, d> > 0 for all l")

    w.setflags(write=False)
    w_hat.setflags(write=False)
    witness.setflags(write=False)
    return PolyhedralCone(
        dim=dim,
        facet_normals=w,
        normalized_normals=w_hat,
        interior_witness=witness,
        name=name,
    )


def _find_interior_witness(w: np.ndarray) -> np.ndarray | None:
    w_hat = w / np.abs(w).sum(axis=1)[:, None]

    candidate = w_hat.sum(axis=0)
    norm = np.linalg.norm(candidate)
    if norm > 0 and np.all(w @ (candidate / norm) > 0):
        return candidate / norm

    candidate, *_ = np.linalg.lstsq(w, np.ones(w.shape[0]), rcond=None)
    norm = np.linalg.norm(candidate)
    if norm > 0 and np.all(w @ (candidate / norm) > 0):
        return candidate / norm

    rng = np.random.default_rng(WITNESS_SEED)
    for _ in range(WITNESS_RANDOM_TRIES):
        d = rng.standard_normal(w.shape[1])
        d /= np.linalg.norm(d)
        if np.all(w @ d > 0):
            return d

    return None


def load_cone(path: Path | str) -> PolyhedralCone:
    """Read a cone spec file: {"dim": m, "normals": [[...], ...]}."""
    data = json.loads(Path(path).read_text())
    return cone_from_spec(data)


def cone_from_spec(data: dict) -> PolyhedralCone:
    try:
        dim = int(data["dim"])
        normals = data["normals"]
    except (KeyError, TypeError, ValueError) as e:
        raise ContractViolation(f"invalid cone spec: {e}") from e

    cone = make_cone(normals, name=data.get("name", ""))
    if cone.dim != dim:
        raise ContractViolation(f"cone spec dim={dim} but normals have length {cone.dim}")
    return cone


def _as_vector(cone: PolyhedralCone, y: Sequence[float]) -> np.ndarray:
    v = np.asarray(y, dtype=float)
    if v.ndim != 1 or v.shape[0] != cone.dim:
        raise ContractViolation(f"expected a vector of length {cone.dim}, got shape {v.shape}")
    return v


def oriented_distance(cone: PolyhedralCone, y: Sequence[float]) -> float:
    """Signed distance of y to -K: negative inside int(-K), zero on its boundary."""
    v = _as_vector(cone, y)
    if not np.all(np.isfinite(v)):
        raise ContractViolation("oriented distance needs a finite vector")
    return float(np.max(cone.normalized_normals @ v))


def oriented_distance_rows(cone: PolyhedralCone, ys: np.ndarray) -> np.ndarray:
    """Row-wise oriented distance for a (k, m) array."""
    ys = np.asarray(ys, dtype=float)
    if ys.ndim != 2 or ys.shape[1] != cone.dim:
        raise ContractViolation(f"expected shape (k, {cone.dim}), got {ys.shape}")
    return np.max(ys @ cone.normalized_normals.T, axis=1)


def boundary_tolerance(y: np.ndarray) -> float:
    return 1e-12 * max(1.0, float(np.max(np.abs(y))) if y.size else 1.0)


def classify(cone: PolyhedralCone, y: Sequence[float]) -> Position:
    """Place y in int K, on bd K or outside K, with a scaled boundary band."""
    v = _as_vector(cone, y)
    values = cone.normalized_normals @ v
    tol = boundary_tolerance(v)
    if np.all(values > tol):
        return Position.INTERIOR
    if np.all(values >= -tol):
        return Position.BOUNDARY
    return Position.OUTSIDE


def leq(cone: PolyhedralCone, y: Sequence[float], z: Sequence[float]) -> bool:
    """y <=_K z, i.e. z - y in K."""
    diff = _as_vector(cone, z) - _as_vector(cone, y)
    return bool(np.all(cone.normalized_normals @ diff >= 0.0))


def lt(cone: PolyhedralCone, y: Sequence[float], z: Sequence[float]) -> bool:
    """y <_K z, i.e. z - y in int K."""
    diff = _as_vector(cone, z) - _as_vector(cone, y)
    return bool(np.all(cone.normalized_normals @ diff > 0.0))


def _as_points(cone: PolyhedralCone, points: Sequence[Sequence[float]]) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ContractViolation("expected a nonempty list of points")
    if pts.shape[1] != cone.dim:
        raise ContractViolation(f"points have length {pts.shape[1]}, cone dim is {cone.dim}")
    return pts


def _pairwise_scores(cone: PolyhedralCone, pts: np.ndarray) -> np.ndarray:
    # scores[i, j, l] = <w_l, pts[i] - pts[j]>
    diffs = pts[:, None, :] - pts[None, :, :]
    return diffs @ cone.normalized_normals.T


def min_elements(cone: PolyhedralCone, points: Sequence[Sequence[float]]) -> list[int]:
    """
    Indices of K-minimal points.

    Point i is minimal when no point j with a different value satisfies
    pts[j] <=_K pts[i]. Exact duplicates of a minimal value are all returned.
    """
    pts = _as_points(cone, points)
    scores = _pairwise_scores(cone, pts)
    dominated_by = np.all(scores >= 0.0, axis=2)  # [i, j]: pts[j] <= pts[i]
    distinct = np.any(pts[:, None, :] != pts[None, :, :], axis=2)
    dominated = np.any(dominated_by & distinct, axis=1)
    return [int(i) for i in np.flatnonzero(~dominated)]


def wmin_elements(cone: PolyhedralCone, points: Sequence[Sequence[float]]) -> list[int]:
    """Indices of weakly K-minimal points (no point strictly below via int K)."""
    pts = _as_points(cone, points)
    scores = _pairwise_scores(cone, pts)
    strictly_dominated = np.any(np.all(scores > 0.0, axis=2), axis=1)
    return [int(i) for i in np.flatnonzero(~strictly_dominated)]


def lower_set_relation(
    cone: PolyhedralCone,
    a: Sequence[Sequence[float]],
    b: Sequence[Sequence[float]],
) -> SetRelation:
    """
    Compare finite sets: A <=^l B iff every b has some a <=_K b.

    StrictLower when every b has some a <_K b.
    """
    pa = _as_points(cone, a)
    pb = _as_points(cone, b)
    # scores[j, i, l] = <w_l, b_j - a_i>
    scores = (pb[:, None, :] - pa[None, :, :]) @ cone.normalized_normals.T
    if np.all(np.any(np.all(scores > 0.0, axis=2), axis=1)):
        return SetRelation.STRICT_LOWER
    if np.all(np.any(np.all(scores >= 0.0, axis=2), axis=1)):
        return SetRelation.WEAK_LOWER
    return SetRelation.NONE
