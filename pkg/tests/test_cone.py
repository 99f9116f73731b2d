"""Tests for ordering cones, the oriented distance and set orders."""

import itertools
import json

import numpy as np
import pytest

from services.cone import (
    ContractViolation,
    Position,
    SetRelation,
    classify,
    cone_from_spec,
    leq,
    load_cone,
    lower_set_relation,
    lt,
    make_cone,
    min_elements,
    oriented_distance,
    oriented_distance_rows,
    wmin_elements,
)
from services.suite import cone_k1, resolve_cone


def test_oriented_distance_orthant(k1):
    """Test oriented distance on R^2_+ matches the max-norm projection values."""
    assert oriented_distance(k1, [-1.0, -2.0]) == pytest.approx(-1.0)
    assert oriented_distance(k1, [0.0, 0.0]) == 0.0
    assert oriented_distance(k1, [1.0, -1.0]) == pytest.approx(1.0)


def test_oriented_distance_k2(k2):
    """Test oriented distance uses l1-normalized normals."""
    assert oriented_distance(k2, [1.0, 0.0]) == pytest.approx(7 / 8)


def test_oriented_distance_dimension_mismatch(k1):
    """Test a wrong-length vector is rejected."""
    with pytest.raises(ContractViolation):
        oriented_distance(k1, [1.0, 2.0, 3.0])


def test_oriented_distance_rows_matches_scalar(k3):
    """Test the row-wise variant agrees with the scalar one."""
    ys = np.random.default_rng(3).standard_normal((20, 2))
    expected = [oriented_distance(k3, y) for y in ys]
    np.testing.assert_allclose(oriented_distance_rows(k3, ys), expected)


@pytest.mark.parametrize("cone_name", ["k1", "k2", "k3"])
def test_oriented_distance_properties(cone_name, request):
    """Test sign, homogeneity, subadditivity, Lipschitz and monotonicity on random vectors."""
    cone = request.getfixturevalue(cone_name)
    rng = np.random.default_rng(11)
    for _ in range(200):
        y, z = rng.standard_normal(2), rng.standard_normal(2)
        dy, dz = oriented_distance(cone, y), oriented_distance(cone, z)

        position = classify(cone, -y)
        if position is Position.INTERIOR:
            assert dy < 0
        elif position is Position.OUTSIDE:
            assert dy > 0

        scale = rng.uniform(0.1, 10.0)
        assert oriented_distance(cone, scale * y) == pytest.approx(scale * dy)
        assert oriented_distance(cone, y + z) <= dy + dz + 1e-12
        assert abs(dy - dz) <= np.max(np.abs(y - z)) + 1e-12

        if leq(cone, y, z):
            assert dy <= dz + 1e-12

    assert oriented_distance(cone, cone.interior_witness) > 0
    assert oriented_distance(cone, -cone.interior_witness) < 0


@pytest.mark.parametrize("cone_name", ["K1-2", "K1-3", "K1-5", "K2", "K3"])
def test_oriented_distance_properties_bulk(cone_name):
    """Test homogeneity, subadditivity, Lipschitz and monotonicity on 10^4 random pairs."""
    cone = resolve_cone(cone_name.split("-")[0], int(cone_name.split("-")[1]) if "-" in cone_name else 2)
    rng = np.random.default_rng(17)
    ys = rng.standard_normal((10_000, cone.dim))
    zs = rng.standard_normal((10_000, cone.dim))
    dy, dz = oriented_distance_rows(cone, ys), oriented_distance_rows(cone, zs)

    scales = rng.uniform(0.1, 10.0, size=(10_000, 1))
    np.testing.assert_allclose(oriented_distance_rows(cone, scales * ys), scales[:, 0] * dy, rtol=1e-12, atol=1e-12)
    assert np.all(oriented_distance_rows(cone, ys + zs) <= dy + dz + 1e-12)
    assert np.all(np.abs(dy - dz) <= np.max(np.abs(ys - zs), axis=1) + 1e-12)

    # z = y + k with k in the cone gives y <=_K z
    ks = np.abs(rng.standard_normal((10_000, 1))) * cone.interior_witness
    assert np.all(dy <= oriented_distance_rows(cone, ys + ks) + 1e-12)
    assert np.all(oriented_distance_rows(cone, -ks) < 0)


@pytest.mark.parametrize("cone_name", ["K1-2", "K1-3", "K1-5", "K2", "K3"])
def test_oriented_distance_reverse_triangle_and_strict_monotonicity(cone_name):
    """Test delta(y) - delta(z) <= delta(y - z) and y <_K z implies delta(y) < delta(z)."""
    cone = resolve_cone(cone_name.split("-")[0], int(cone_name.split("-")[1]) if "-" in cone_name else 2)
    rng = np.random.default_rng(23)
    ys = rng.standard_normal((10_000, cone.dim))
    zs = rng.standard_normal((10_000, cone.dim))
    dy, dz = oriented_distance_rows(cone, ys), oriented_distance_rows(cone, zs)
    assert np.all(dy - dz <= oriented_distance_rows(cone, ys - zs) + 1e-12)

    ks = rng.uniform(0.1, 5.0, size=(10_000, 1)) * cone.interior_witness
    assert np.all(dy < oriented_distance_rows(cone, ys + ks))
    for y, k in zip(ys[:500], ks[:500]):
        assert lt(cone, y, y + k)
        assert oriented_distance(cone, y) < oriented_distance(cone, y + k)

    for y, z in zip(ys[:2000], zs[:2000]):
        if lt(cone, y, z):
            assert oriented_distance(cone, y) < oriented_distance(cone, z)


@pytest.mark.parametrize("cone_name", ["K1-2", "K1-3", "K1-5", "K2", "K3"])
def test_oriented_distance_sign_trichotomy(cone_name):
    """Test delta(y) < 0, = 0, > 0 as y lies in int(-K), bd(-K) or outside -K."""
    cone = resolve_cone(cone_name.split("-")[0], int(cone_name.split("-")[1]) if "-" in cone_name else 2)
    rng = np.random.default_rng(29)
    for y in rng.standard_normal((2000, cone.dim)):
        position = classify(cone, -y)
        if position is Position.INTERIOR:
            assert oriented_distance(cone, y) < 0
        elif position is Position.OUTSIDE:
            assert oriented_distance(cone, y) > 0

    # points of bd K: the interior witness projected onto each facet hyperplane
    boundary = []
    for w in cone.facet_normals:
        d = cone.interior_witness
        k = d - (w @ d) / (w @ w) * w
        if classify(cone, k) is Position.BOUNDARY:
            boundary.append(k)
    assert boundary
    for k in boundary:
        for scale in rng.uniform(0.1, 10.0, size=20):
            assert oriented_distance(cone, -scale * k) == pytest.approx(0.0, abs=1e-12)


def test_classify_and_orders(k1, k3):
    """Test interior, boundary and outside placement and the induced orders."""
    assert leq(k1, [0, 0], [1, 1])
    assert not lt(k1, [0, 0], [1, 0])
    assert lt(k1, [0, 0], [1, 1])
    assert classify(k3, [-1, -1]) is Position.INTERIOR
    assert classify(k1, [1, 0]) is Position.BOUNDARY
    assert classify(k1, [1, -1]) is Position.OUTSIDE


def test_make_cone_rejects_degenerate_normals():
    """Test zero normals, rank deficiency and empty interior are rejected."""
    with pytest.raises(ContractViolation):
        make_cone([[0.0, 0.0], [1.0, 0.0]])
    with pytest.raises(ContractViolation):
        make_cone([[1.0, 1.0], [2.0, 2.0]])
    with pytest.raises(ContractViolation):
        make_cone([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])


def test_cone_from_spec_checks_dim():
    """Test the declared dimension must match the normals."""
    cone = cone_from_spec({"dim": 2, "normals": [[1, 0], [0, 1]], "name": "orthant"})
    assert cone.name == "orthant"
    assert cone.contains([1.0, 1.0])
    with pytest.raises(ContractViolation):
        cone_from_spec({"dim": 3, "normals": [[1, 0], [0, 1]]})


def test_min_and_wmin_examples(k1):
    """Test minimal and weakly minimal elements of small sets."""
    points = [[1, 0], [0, 1], [1, 1]]
    assert min_elements(k1, points) == [0, 1]
    assert wmin_elements(k1, points) == [0, 1, 2]
    assert min_elements(k1, [[5, 5]]) == [0]


def test_min_elements_keeps_duplicates(k1):
    """Test equal minimal values are all reported."""
    assert min_elements(k1, [[0, 1], [0, 1], [1, 0]]) == [0, 1, 2]


def _brute_min(cone, points):
    """(y0 - K) intersected with the set is {y0}."""
    keep = []
    for i, y in enumerate(points):
        below = [z for z in points if leq(cone, z, y) and not np.array_equal(z, y)]
        if not below:
            keep.append(i)
    return keep


def _brute_wmin(cone, points):
    return [i for i, y in enumerate(points) if not any(lt(cone, z, y) for z in points)]


@pytest.mark.parametrize("m", [1, 2, 3])
def test_min_elements_against_definition(m):
    """Test Min and WMin against a pairwise definition check on random integer sets."""
    cone = cone_k1(m)
    rng = np.random.default_rng(100 + m)
    for _ in range(1000):
        size = int(rng.integers(1, 9))
        points = rng.integers(0, 4, size=(size, m)).astype(float)
        minimal = min_elements(cone, points)
        weak = wmin_elements(cone, points)
        assert minimal == _brute_min(cone, points)
        assert weak == _brute_wmin(cone, points)
        assert set(minimal) <= set(weak)


def test_min_elements_general_cone(k2):
    """Test Min under a non-orthant cone against the definition."""
    rng = np.random.default_rng(5)
    for _ in range(200):
        points = rng.integers(-3, 4, size=(6, 2)).astype(float)
        assert min_elements(k2, points) == _brute_min(k2, points)
        assert wmin_elements(k2, points) == _brute_wmin(k2, points)


def test_min_elements_k3(k3):
    """Test Min and WMin under the K3 cone against the definition."""
    rng = np.random.default_rng(6)
    for _ in range(200):
        points = rng.integers(-3, 4, size=(6, 2)).astype(float)
        assert min_elements(k3, points) == _brute_min(k3, points)
        assert wmin_elements(k3, points) == _brute_wmin(k3, points)


def test_min_elements_rejects_empty(k1):
    """Test an empty point list is a contract violation."""
    with pytest.raises(ContractViolation):
        min_elements(k1, [])


def test_lower_set_relation(k1):
    """Test strict, weak and missing lower set-less relations."""
    assert lower_set_relation(k1, [[0, 0]], [[1, 1]]) is SetRelation.STRICT_LOWER
    same = [[0, 1], [1, 0]]
    assert lower_set_relation(k1, same, same) is SetRelation.WEAK_LOWER
    assert lower_set_relation(k1, [[0, 2], [2, 0]], [[1, 1]]) is SetRelation.NONE
    assert SetRelation.NONE.value == "None"


def test_lower_set_relation_is_transitive_on_chains(k1):
    """Test shifting a set down by an interior vector gives StrictLower."""
    rng = np.random.default_rng(2)
    for _ in range(50):
        b = rng.standard_normal((4, 2))
        a = b - rng.uniform(0.1, 1.0, size=2)
        assert lower_set_relation(k1, a, b) is SetRelation.STRICT_LOWER
        assert lower_set_relation(k1, b, a) is SetRelation.NONE


def test_cone_normals_are_read_only(k1):
    """Test the cone cannot be mutated after construction."""
    with pytest.raises(ValueError):
        k1.facet_normals[0, 0] = 5.0
    assert list(itertools.chain.from_iterable(k1.to_spec()["normals"])) == [1.0, 0.0, 0.0, 1.0]


def test_load_cone(tmp_path, k2):
    """Test a cone spec file round-trips through load_cone."""
    path = tmp_path / "k2.json"
    path.write_text(json.dumps(k2.to_spec()))
    cone = load_cone(path)
    np.testing.assert_array_equal(cone.facet_normals, k2.facet_normals)
    assert cone.name == "K2"
    (tmp_path / "bad.json").write_text(json.dumps({"normals": [[1, 0], [0, 1]]}))
    with pytest.raises(ContractViolation):
        load_cone(tmp_path / "bad.json")
