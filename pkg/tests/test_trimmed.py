import math

import numpy as np
import pytest

from robfusion.datagen import KrausConfig, generate, true_cov
from robfusion.errors import CapacityError
from robfusion.grid import FunctionalSample, Grid
from robfusion.hs import CovMatrix, RankOneOperator, cov_hs_distance, hs_distance_sq, materialize
from robfusion.trimmed import (
    TrimConfig,
    TrimResult,
    distance_matrix,
    iter_distance_rows,
    pairwise_r_radius,
    sample_cov,
    trim_size,
    trimmed_mean,
)

from .conftest import sample_from_rows


def brute_trim(sample, alpha):
    """Direct transcription of the four steps with Python loops."""
    ops = [RankOneOperator.from_function(x) for x in sample]
    n = len(ops)
    d = [[math.sqrt(hs_distance_sq(ops[i], ops[j])) if i != j else 0.0 for j in range(n)] for i in range(n)]
    r = min(n, math.floor((1 - alpha) * n) + 1)
    radii = [sorted(row)[r - 1] for row in d]
    gamma = min(range(n), key=lambda i: (radii[i], i))
    order = sorted(range(n), key=lambda j: (d[gamma][j], j != gamma, j))
    kept = sorted(order[:r])
    est = sum(np.outer(sample.rows[j], sample.rows[j]) for j in kept) / r
    return gamma, kept, est, radii


def inlier_outlier_sample(scale):
    t = 4
    x = np.ones(t)  # unit norm under the 1/T weight
    y = np.array([1.0, -1.0, 1.0, -1.0])  # unit norm, orthogonal to x
    return sample_from_rows([x, x, x, x, scale * y]), x


def test_trim_size():
    assert trim_size(5, 0.4) == 4
    assert trim_size(10, 0.0) == 10  # clamp of floor(n)+1
    assert trim_size(10, 0.25) == 8


def test_config_validation():
    with pytest.raises(ValueError):
        TrimConfig(1.0)
    with pytest.raises(ValueError):
        TrimConfig(-0.1)


def test_sample_cov_examples(rng):
    x = np.array([0.5, -1.0, 2.0])
    k = materialize(RankOneOperator.from_function(sample_from_rows([x])[0])).m
    np.testing.assert_array_equal(sample_cov(sample_from_rows([x, x, x, x])).m, k)
    np.testing.assert_array_equal(sample_cov(sample_from_rows([x, -x])).m, k)
    with pytest.raises(ValueError):
        sample_cov(FunctionalSample(Grid(3), np.empty((0, 3))))


def test_sample_cov_consistency():
    cfg = KrausConfig(n=20000, p=0.0, seed=3)
    assert cov_hs_distance(sample_cov(generate(cfg)), true_cov(cfg)) < 0.1


def test_radius_examples(rng):
    s = sample_from_rows(rng.standard_normal((9, 5)))
    one = pairwise_r_radius(s, 1)
    np.testing.assert_array_equal(one.radii, 0.0)
    np.testing.assert_array_equal(one.neighbours[:, 0], np.arange(9))
    full = pairwise_r_radius(s, 9)
    np.testing.assert_allclose(full.radii, distance_matrix(s).max(axis=1), rtol=1e-15)
    with pytest.raises(ValueError):
        pairwise_r_radius(s, 10)


def test_radius_self_first_with_duplicates():
    x = np.array([1.0, 2.0])
    res = pairwise_r_radius(sample_from_rows([x, x, x]), 1)
    np.testing.assert_array_equal(res.neighbours[:, 0], [0, 1, 2])


def test_radius_inlier_outlier():
    s, _ = inlier_outlier_sample(10.0)
    res = pairwise_r_radius(s, 4)
    np.testing.assert_array_equal(res.radii[:4], 0.0)
    assert res.radii[4] == pytest.approx(math.sqrt(1 + 1e4), rel=1e-12)


def test_trimmed_mean_examples():
    s, x = inlier_outlier_sample(10.0)
    res = trimmed_mean(s, TrimConfig(0.4))
    assert res.r == 4 and res.gamma == 0 and res.radius == 0.0
    assert list(res.kept_indices) == [0, 1, 2, 3]
    np.testing.assert_array_equal(res.estimate.m, np.outer(x, x))


def test_alpha_zero_equals_sample_cov(rng):
    s = sample_from_rows(rng.standard_normal((17, 6)))
    res = trimmed_mean(s, TrimConfig(0.0))
    assert res.r == 17
    np.testing.assert_array_equal(res.estimate.m, sample_cov(s).m)


def test_identical_rows():
    x = [0.25, -0.5, 1.0]
    res = trimmed_mean(sample_from_rows([x, x, x]), TrimConfig(0.3))
    assert res.gamma == 0 and res.radius == 0.0
    np.testing.assert_allclose(res.estimate.m, np.outer(x, x), rtol=1e-15)


def test_errors():
    with pytest.raises(ValueError):
        trimmed_mean(sample_from_rows([[1.0, 2.0]]), TrimConfig(0.1))


@pytest.mark.parametrize("alpha", [0.05, 0.2, 0.5, 0.9])
def test_matches_brute_force(rng, alpha):
    for trial in range(5):
        s = generate(KrausConfig(n=40, p=0.2, t_count=7, seed=trial))
        gamma, kept, est, radii = brute_trim(s, alpha)
        res = trimmed_mean(s, TrimConfig(alpha))
        assert res.gamma == gamma
        assert list(res.kept_indices) == kept
        np.testing.assert_allclose(res.estimate.m, est, rtol=1e-12, atol=1e-14)
        np.testing.assert_allclose(
            pairwise_r_radius(s, res.r, return_sets=False).radii, radii, rtol=1e-9, atol=1e-12
        )


def test_pruned_search_matches_exhaustive():
    # several row blocks, so pruning actually kicks in
    s = generate(KrausConfig(n=1500, p=0.15, seed=11))
    res = trimmed_mean(s, TrimConfig(0.25))
    full = pairwise_r_radius(s, res.r, return_sets=False)
    assert res.gamma == int(np.argmin(full.radii_sq))
    assert res.radius == pytest.approx(full.radii[res.gamma], rel=1e-12)


def test_result_invariants(rng):
    s = generate(KrausConfig(n=300, p=0.1, seed=5))
    res = trimmed_mean(s, TrimConfig(0.2))
    kept = res.kept_indices
    assert len(set(kept.tolist())) == res.r == len(kept)
    assert res.gamma in kept
    d = distance_matrix(s)
    assert res.radius == pytest.approx(d[res.gamma, kept].max(), rel=1e-12)
    for _ in range(100):
        v = rng.standard_normal(20)
        assert v @ res.estimate.m @ v >= -1e-10 * (v @ v)


def test_permutation_covariance(rng):
    s = generate(KrausConfig(n=200, p=0.1, seed=8))
    perm = rng.permutation(s.n)
    a = trimmed_mean(s, TrimConfig(0.2))
    b = trimmed_mean(s.take(perm), TrimConfig(0.2))
    assert sorted(perm[b.kept_indices].tolist()) == a.kept_indices.tolist()
    np.testing.assert_allclose(b.estimate.m, a.estimate.m, rtol=0, atol=1e-12)


def test_monotone_resistance():
    base = trimmed_mean(inlier_outlier_sample(10.0)[0], TrimConfig(0.4)).estimate.m
    for scale in (1e2, 1e4, 1e6):
        est = trimmed_mean(inlier_outlier_sample(scale)[0], TrimConfig(0.4)).estimate.m
        assert est.tobytes() == base.tobytes()


def test_well_separated_outliers_are_dropped():
    s = generate(KrausConfig(n=400, p=0.1, seed=2))
    rows = s.rows.copy()
    rows[s.labels] *= 50.0
    far = FunctionalSample(s.grid, rows, s.labels)
    res = trimmed_mean(far, TrimConfig(0.2))
    assert not np.any(far.labels[res.kept_indices])


def test_distance_matrix_examples(rng):
    np.testing.assert_array_equal(distance_matrix(sample_from_rows([[1.0, 2.0]])), [[0.0]])
    x = rng.standard_normal(4)
    d = distance_matrix(sample_from_rows([x, rng.standard_normal(4), x]))
    assert d[0, 2] == 0.0 and d[2, 0] == 0.0


def test_distance_matrix_vs_materialized(rng):
    s = sample_from_rows(rng.standard_normal((50, 8)) * rng.uniform(0.2, 3, size=(50, 1)))
    d = distance_matrix(s)
    assert np.array_equal(d, d.T)
    assert np.all(np.diag(d) == 0)
    ks = [materialize(RankOneOperator.from_function(x)) for x in s]
    for i in range(0, 50, 7):
        for j in range(50):
            assert d[i, j] == pytest.approx(cov_hs_distance(ks[i], ks[j]), rel=1e-9, abs=1e-9)


def test_distance_matrix_capacity():
    s = sample_from_rows(np.zeros((100, 2)))
    with pytest.raises(CapacityError) as exc:
        distance_matrix(s, limit_bytes=1000)
    assert exc.value.requested_bytes == 80000


def test_streaming_rows_match_dense(rng):
    s = sample_from_rows(rng.standard_normal((600, 5)))
    dense = distance_matrix(s)
    seen = 0
    for start, block in iter_distance_rows(s):
        np.testing.assert_allclose(block, dense[start : start + len(block)], rtol=1e-15, atol=0)
        seen += len(block)
    assert seen == 600


def test_workers_do_not_change_result():
    s = generate(KrausConfig(n=1200, p=0.15, seed=4))
    a = trimmed_mean(s, TrimConfig(0.25), workers=1)
    b = trimmed_mean(s, TrimConfig(0.25), workers=4)
    assert a.gamma == b.gamma
    assert a.estimate.m.tobytes() == b.estimate.m.tobytes()


def test_bundle_roundtrip(tmp_path):
    res = trimmed_mean(inlier_outlier_sample(10.0)[0], TrimConfig(0.4))
    res.write_bundle(tmp_path / "b.csv")
    assert TrimResult.read_record(tmp_path / "b.csv") == {"gamma": 0, "r": 4, "radius": 0.0}
    np.testing.assert_array_equal(CovMatrix.read_csv(tmp_path / "b.csv").m, res.estimate.m)
