from itertools import combinations

import numpy as np
import pytest
from flaky import flaky

from robustspc.depth import spatial_depth, tukey_depth, simplicial_depth, oja_depth, \
    depth, depths, subgroup_depths, estimate_cutvalue, get_depth_kind, DepthError

square = np.array([[1., 0.], [-1., 0.], [0., 1.], [0., -1.]])
corners = np.array([[0., 0.], [1., 0.], [0., 1.], [1., 1.]])


# Brute-force oracles ####################################################################

def tukey_oracle(x, cloud):
    d = cloud - x
    angles = np.arctan2(d[:, 1], d[:, 0])
    candidates = np.concatenate([angles + s * np.pi / 2 + e
                                 for s in (1, -1) for e in (1e-7, -1e-7)])
    u = np.column_stack([np.cos(candidates), np.sin(candidates)])
    return np.sum(d @ u.T >= 0, axis=0).min() / len(cloud)


def simplicial_oracle(x, cloud):
    inside = 0
    triangles = list(combinations(range(len(cloud)), 3))
    for i, j, k in triangles:
        a, b, c = cloud[i], cloud[j], cloud[k]
        lam = np.linalg.solve(np.column_stack([b - a, c - a]), x - a)
        # tolerance only matters for x at a vertex
        inside += lam[0] >= -1e-9 and lam[1] >= -1e-9 and lam.sum() <= 1 + 1e-9
    return inside / len(triangles)


def oja_oracle(x, cloud):
    areas = [abs(np.linalg.det(np.column_stack([cloud[j] - cloud[i], x - cloud[i]]))) / 2
             for i, j in combinations(range(len(cloud)), 2)]
    return 1 / (1 + np.mean(areas))


def spatial_oracle(x, cloud):
    total = np.zeros(cloud.shape[1])
    for y in cloud:
        if np.any(y != x):
            total += (x - y) / np.linalg.norm(x - y)
    return 1 - np.linalg.norm(total / len(cloud))


def test_depth_oracles():
    rng = np.random.default_rng(11)
    for _ in range(200):
        n = rng.integers(3, 11)
        cloud = rng.normal(size=(n, 2))
        points = np.vstack([cloud, rng.normal(size=(3, 2)), rng.normal(size=(1, 2)) * 5])
        for x in points:
            assert tukey_depth(x, cloud) == tukey_oracle(x, cloud)
            assert simplicial_depth(x, cloud) == simplicial_oracle(x, cloud)
            assert abs(oja_depth(x, cloud) - oja_oracle(x, cloud)) < 1e-12
            assert abs(spatial_depth(x, cloud) - spatial_oracle(x, cloud)) < 1e-12


def test_spatial_examples():
    assert spatial_depth([0, 0], square) == pytest.approx(1)
    assert spatial_depth([1, 0], square) == pytest.approx(1 - (1 + np.sqrt(2)) / 4)
    far = [spatial_depth([r, r], square) for r in (2, 10, 100, 1e4)]
    assert np.all(np.diff(far) < 0) and far[-1] < 1e-3


def test_tukey_examples():
    assert tukey_depth([0, 0], corners * 2 - 1) == 0.5
    assert tukey_depth([5, 5], corners) == 0
    triangle = np.array([[0., 0.], [1., 0.], [0.3, 1.]])
    assert tukey_depth(triangle[0], triangle) == pytest.approx(1 / 3)
    # univariate
    assert tukey_depth([2.], [[1.], [2.], [3.], [4.]]) == 0.5
    with pytest.raises(DepthError):
        tukey_depth(np.zeros(3), np.random.default_rng(0).normal(size=(10, 3)))


def test_simplicial_examples():
    triangle = np.array([[0., 0.], [1., 0.], [0., 1.]])
    assert simplicial_depth([0.2, 0.2], triangle) == 1
    assert simplicial_depth([2., 2.], triangle) == 0
    assert simplicial_depth([0.5, 0.5], corners) == 1
    with pytest.raises(DepthError):
        simplicial_depth([0.], [[0.], [1.], [2.]])
    with pytest.raises(DepthError):
        simplicial_depth([0., 0.], triangle[:2])


def test_oja_examples():
    assert oja_depth([1., 1.], np.ones((5, 2))) == 1
    areas = [abs(np.linalg.det(np.column_stack([corners[j] - corners[i],
                                                -corners[i]]))) / 2
             for i, j in combinations(range(4), 2)]
    assert oja_depth([0., 0.], corners) == pytest.approx(1 / (1 + np.mean(areas)))
    assert oja_depth([1e6, 0.], corners) < 1e-5
    with pytest.raises(DepthError):
        oja_depth(np.zeros(3), np.ones((5, 3)))


def test_dispatch():
    assert depth("Spatial", [0, 0], square) == pytest.approx(1)
    assert depth("tukey", [9, 9], square) == 0
    assert depth("OJA", [1., 1.], np.ones((4, 2))) == 1
    assert get_depth_kind("Simplicial") == "simplicial"
    with pytest.raises(DepthError):
        depth("spacial", [0, 0], square)
    rng = np.random.default_rng(12)
    cloud, points = rng.normal(size=(8, 2)), rng.normal(size=(5, 2))
    for kind in ("spatial", "tukey", "simplicial", "oja"):
        assert np.allclose(depths(kind, points, cloud),
                           [depth(kind, x, cloud) for x in points])


def test_subgroup_depths_block():
    rng = np.random.default_rng(13)
    block = rng.normal(size=(4, 9, 2))
    for kind in ("spatial", "tukey", "simplicial", "oja"):
        values = subgroup_depths(block, kind)
        assert values.shape == (4, 9)
        assert np.all((values >= 0) & (values <= 1))
        assert np.allclose(values[2], [depth(kind, x, block[2]) for x in block[2]])


@flaky(max_runs=3, min_passes=1)
def test_invariances():
    rng = np.random.default_rng()
    cloud, x = rng.normal(size=(9, 2)), rng.normal(size=2) * 0.5
    theta = rng.uniform(0, 2 * np.pi)
    q = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    b = rng.normal(size=2) * 10
    for kind in ("spatial", "tukey", "simplicial", "oja"):
        assert depth(kind, q @ x + b, cloud @ q.T + b) == pytest.approx(
            depth(kind, x, cloud), abs=1e-9)
    a = np.array([[2., 0.3], [0., 0.5]])
    for kind in ("tukey", "simplicial"):
        assert depth(kind, a @ x + b, cloud @ a.T + b) == depth(kind, x, cloud)
    assert oja_depth(a @ x + b, cloud @ a.T + b, standardize=True) == pytest.approx(
        oja_depth(x, cloud, standardize=True))


def test_simplicial_center_deeper():
    angles = np.linspace(0, 2 * np.pi, 7)[:-1]
    hexagon = np.column_stack([np.cos(angles), np.sin(angles)])
    center = simplicial_depth([0, 0], hexagon)
    assert all(center >= simplicial_depth(v * 1.5, hexagon) for v in hexagon)


def test_cutvalue_duplication_invariance():
    rng = np.random.default_rng(14)
    group = rng.normal(size=(20, 2))
    assert estimate_cutvalue(group[None], "spatial") == \
           estimate_cutvalue(np.stack([group, group]), "spatial")


def test_cutvalue_below_all_depths():
    rng = np.random.default_rng(15)
    groups = rng.normal(size=(10, 5, 2))
    cut = estimate_cutvalue(groups, "spatial", trim_fraction=0.01)
    assert cut == 0
    assert np.all(subgroup_depths(groups, "spatial") > cut)
    with pytest.raises(DepthError):
        estimate_cutvalue(groups, "spatial", trim_fraction=0.6)


@flaky(max_runs=3, min_passes=1)
def test_cutvalue_holdout():
    rng = np.random.default_rng()
    cov = [[1., 0.3], [0.3, 1.2]]
    cut = estimate_cutvalue(rng.multivariate_normal([0, 0], cov, size=(100, 20)),
                            "spatial", 0.1)
    fresh = subgroup_depths(rng.multivariate_normal([0, 0], cov, size=(500, 20)),
                            "spatial")
    assert 0.08 <= np.mean(fresh <= cut) <= 0.12
