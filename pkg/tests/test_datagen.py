import math

import numpy as np
import pytest

from robfusion.datagen import KrausConfig, generate, outlier_mean, true_cov
from robfusion.grid import Grid
from robfusion.hs import cov_hs_distance
from robfusion.trimmed import sample_cov


def test_config_validation():
    with pytest.raises(ValueError):
        KrausConfig(n=10, p=1.0)
    with pytest.raises(ValueError):
        KrausConfig(n=10, t_count=1)


def test_noise_free_rows():
    s = generate(KrausConfig(n=20, p=0.0, noise=False))
    assert np.all(s.rows == 0.0)
    s = generate(KrausConfig(n=20, p=0.999999, noise=False, seed=1))
    assert s.labels.all()
    np.testing.assert_array_equal(s.rows, np.tile(2 - 8 * np.sin(np.pi * Grid(20).points), (20, 1)))


def test_model_by_hand():
    # rebuild one row from the coefficients with explicit loops
    cfg = KrausConfig(n=3, p=0.0, t_count=5, seed=7)
    from robfusion._rng import stream

    coef = stream(7, 1, 0).standard_normal((3, 20))
    t = Grid(5).points
    row = np.zeros(5)
    for k in range(1, 11):
        row += math.sqrt(2) * k**-3 * coef[1, k - 1] * np.sin(2 * np.pi * k * t)
        row += math.sqrt(2) * (1 / 3) ** k * coef[1, 10 + k - 1] * np.cos(2 * np.pi * k * t)
    np.testing.assert_allclose(generate(cfg).rows[1], row, rtol=1e-12, atol=1e-14)


def test_true_cov_example():
    c = true_cov(KrausConfig(n=1, k_max=1))
    assert c.m[0, 0] == pytest.approx(2 / 9, rel=1e-14)
    assert np.all(np.diag(true_cov(KrausConfig(n=1)).m) >= 0)


def test_true_cov_psd(rng):
    c = true_cov(KrausConfig(n=1, t_count=31)).m
    for _ in range(200):
        v = rng.standard_normal(31)
        assert v @ c @ v >= -1e-10


def test_empirical_mean_small():
    for seed in range(5):
        s = generate(KrausConfig(n=20000, seed=seed))
        assert np.abs(s.rows.mean(axis=0)).max() < 0.05


def test_variance_matches_diagonal():
    cfg = KrausConfig(n=100_000, seed=9)
    s = generate(cfg)
    np.testing.assert_allclose(np.mean(s.rows**2, axis=0), np.diag(true_cov(cfg).m), rtol=0.05)


def test_sample_cov_converges():
    truth = true_cov(KrausConfig(n=1))
    small = np.mean([cov_hs_distance(sample_cov(generate(KrausConfig(n=5000, seed=100 + s))), truth) for s in range(5)])
    large = np.mean([cov_hs_distance(sample_cov(generate(KrausConfig(n=50000, seed=200 + s))), truth) for s in range(5)])
    assert large / small < 0.6


@pytest.mark.parametrize("p", [0.13, 0.2])
def test_label_fidelity(p):
    n = 50000
    s = generate(KrausConfig(n=n, p=p, seed=4))
    assert abs(s.labels.mean() - p) <= 3 * math.sqrt(p * (1 - p) / n)


def test_outliers_shift_mean():
    s = generate(KrausConfig(n=20000, p=0.3, seed=1))
    t = s.grid.points
    np.testing.assert_allclose(s.rows[s.labels].mean(axis=0), outlier_mean(t), atol=0.06)


def test_fixed_count():
    s = generate(KrausConfig(n=1000, p=0.15, fixed_count=True, seed=2))
    assert s.labels.sum() == 150
    # positions are spread, not bunched at the front
    assert 0 < s.labels[:500].sum() < 150


def test_rows_independent_of_n():
    a = generate(KrausConfig(n=5000, p=0.1, seed=3))
    b = generate(KrausConfig(n=9000, p=0.1, seed=3))
    np.testing.assert_array_equal(a.rows, b.rows[:5000])
    np.testing.assert_array_equal(a.labels, b.labels[:5000])
