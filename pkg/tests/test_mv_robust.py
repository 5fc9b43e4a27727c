import numpy as np
import pytest
from flaky import flaky

from robustspc.depth import subgroup_depths, estimate_cutvalue
from robustspc.mv_robust import mv_trimmed_mean, mv_winsorized_dispersion, \
    trim_and_winsorize, trim_and_winsorize_block, classical_mean_and_dispersion, \
    tau_squared, psi_squared, hotelling_t2, quadratic_forms, AllTrimmedError, \
    SingularDispersionError

from .common import sigma_bivariate


def test_no_trimming_is_classical():
    rng = np.random.default_rng(21)
    for _ in range(100):
        x = rng.normal(size=(rng.integers(3, 25), 2))
        trimmed, dispersion = trim_and_winsorize(x, "spatial", -1.)
        assert trimmed.trimmed_indices == ()
        assert trimmed.retained_count == len(x)
        mean, cov = classical_mean_and_dispersion(x)
        assert np.max(np.abs(trimmed.mean - mean)) < 1e-10
        assert np.max(np.abs(dispersion - cov)) < 1e-10
        assert np.allclose(cov, np.cov(x.T))


def test_all_trimmed():
    rng = np.random.default_rng(22)
    x = rng.normal(size=(10, 2))
    with pytest.raises(AllTrimmedError):
        mv_trimmed_mean(x, "spatial", 1.)
    block = trim_and_winsorize_block(np.stack([x, x]), "spatial", 1.)
    assert not np.any(block.valid)
    assert np.all(np.isnan(block.means))


def test_outlier_trimmed():
    rng = np.random.default_rng(23)
    cut = estimate_cutvalue(rng.multivariate_normal([0, 0], sigma_bivariate, (100, 20)),
                            "spatial", 0.1)
    x = rng.multivariate_normal([0, 0], sigma_bivariate, 20)
    x[7] = [5., 5.]
    trimmed = mv_trimmed_mean(x, "spatial", cut)
    assert 7 in trimmed.trimmed_indices
    depths = subgroup_depths(x, "spatial")
    assert np.allclose(trimmed.mean, x[depths > cut].mean(axis=0))
    assert trimmed.retained_count + len(trimmed.trimmed_indices) == 20
    # mean lies in the bounding box of the retained points
    retained = x[depths > cut]
    assert np.all(trimmed.mean >= retained.min(axis=0))
    assert np.all(trimmed.mean <= retained.max(axis=0))


def test_winsorized_dispersion_substitution():
    rng = np.random.default_rng(24)
    x = rng.multivariate_normal([0, 0], sigma_bivariate, 20)
    depths = subgroup_depths(x, "spatial")
    order = np.argsort(depths)
    # trims exactly the two least deep points
    cut = (depths[order[1]] + depths[order[2]]) / 2
    y = x.copy()
    y[order[:2]] = x[order[2]]
    assert np.allclose(mv_winsorized_dispersion(x, "spatial", cut), np.cov(y.T))
    assert np.allclose(mv_winsorized_dispersion(np.ones((6, 2)), "spatial", 0.5), 0)


def test_trimmed_point_is_irrelevant():
    rng = np.random.default_rng(25)
    x = rng.normal(size=(12, 2))
    depths = subgroup_depths(x, "oja")
    worst = int(np.argmin(depths))
    cut = np.sort(depths)[1] - 1e-12
    first, _ = trim_and_winsorize(x, "oja", cut, depth_values=depths)
    x[worst] = [1e6, -1e6]
    second, _ = trim_and_winsorize(x, "oja", cut, depth_values=depths)
    assert np.array_equal(first.mean, second.mean)


def test_quadratic_forms():
    assert tau_squared([1., 2.], [1., 2.], np.eye(2)) == 0
    assert tau_squared([1., 1.], [0., 0.], np.eye(2)) == pytest.approx(2)
    d = np.array([0.3, -1.7])
    assert tau_squared(d, [0, 0], 2 * np.eye(2)) == pytest.approx(d @ d / 2)
    assert psi_squared([0., 1.], [0., 0.], np.diag([1., 4.])) == pytest.approx(0.25)
    assert hotelling_t2([1., 0.], [0., 0.], np.eye(2)) == pytest.approx(1)
    rng = np.random.default_rng(26)
    x, mu = rng.normal(size=2), rng.normal(size=2)
    s = np.cov(rng.normal(size=(10, 2)).T)
    assert psi_squared(x, mu, s) == tau_squared(x, mu, s) == hotelling_t2(x, mu, s)
    diffs = rng.normal(size=(5, 2))
    assert np.allclose(quadratic_forms(diffs, s),
                       [d @ np.linalg.solve(s, d) for d in diffs])
    # univariate
    assert quadratic_forms([[2.]], [[4.]])[0] == pytest.approx(1)


@flaky(max_runs=3, min_passes=1)
def test_affine_consistency():
    rng = np.random.default_rng()
    x, mu = rng.normal(size=2), rng.normal(size=2)
    s = np.cov(rng.normal(size=(10, 2)).T)
    a = rng.normal(size=(2, 2)) + 2 * np.eye(2)
    b = rng.normal(size=2)
    assert tau_squared(a @ x + b, a @ mu + b, a @ s @ a.T) == pytest.approx(
        tau_squared(x, mu, s), rel=1e-8)


def test_singular():
    with pytest.raises(SingularDispersionError):
        tau_squared([1., 1.], [0., 0.], np.zeros((2, 2)))
    with pytest.raises(SingularDispersionError):
        tau_squared([1., 1.], [0., 0.], [[1., 1.], [1., 1.]])
    with pytest.raises(SingularDispersionError):
        tau_squared([1., 1.], [0., 0.], [[np.nan, 0.], [0., 1.]])
