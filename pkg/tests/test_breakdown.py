import itertools
import math

import numpy as np
import pytest
from scipy import stats

from robfusion.breakdown import (
    BreakdownConfig,
    binom_upper_tail,
    block_break_bound,
    block_break_prob,
    fused_break_prob_exact,
    simulate_breakdown,
)
from robfusion.errors import BoundInapplicableError


def test_config_validation():
    with pytest.raises(ValueError):
        BreakdownConfig(n=10, m=3, p=0.1)
    with pytest.raises(ValueError):
        BreakdownConfig(n=10, m=2, p=1.5)


@pytest.mark.parametrize("m", [1, 4, 5])
def test_extremes(m):
    assert simulate_breakdown(BreakdownConfig(n=15 * m, m=m, p=0.0, replicates=300)).break_fraction == 0.0
    assert simulate_breakdown(BreakdownConfig(n=15 * m, m=m, p=1.0, replicates=300)).break_fraction == 1.0


def test_block_break_prob_examples():
    for p in (0.0, 0.2, 0.7, 1.0):
        assert block_break_prob(1, p) == pytest.approx(p, abs=1e-15)
    assert block_break_prob(3, 0.5) == pytest.approx(0.5, rel=1e-14)
    assert block_break_prob(6000, 0.45) <= 1e-12


def test_block_break_prob_against_scipy():
    for l, p in itertools.product([1, 2, 3, 10, 11, 200, 6000], [0.01, 0.3, 0.45, 0.499, 0.5, 0.8]):
        # odd l: P(Y > l/2); even l: P(Y >= l/2)
        expected = stats.binom.sf((l - 1) // 2, l, p)
        assert block_break_prob(l, p) == pytest.approx(expected, rel=1e-9, abs=1e-300)


def test_even_block_counts_half_as_broken():
    # l = 2: breaks with one or two outliers
    assert block_break_prob(2, 0.3) == pytest.approx(1 - 0.7**2, rel=1e-14)


def test_bound_examples():
    assert block_break_bound(6000, 0.45) == pytest.approx(math.exp(-30), rel=1e-12)
    assert block_break_bound(40, 1e-300) == pytest.approx(math.exp(-20), rel=1e-12)
    with pytest.raises(BoundInapplicableError):
        block_break_bound(10, 0.5)


def test_bound_dominates_exact_tail():
    for l in range(3, 202, 2):
        for p in np.arange(0.05, 0.451, 0.05):
            assert block_break_bound(l, p) >= block_break_prob(l, p)


def test_exact_fused_examples():
    assert fused_break_prob_exact(1, 7, 0.3) == pytest.approx(block_break_prob(7, 0.3), rel=1e-14)
    assert fused_break_prob_exact(9, 11, 0.0) == 0.0
    assert fused_break_prob_exact(5, 6000, 0.499) == pytest.approx(0.39, abs=0.01)


def test_exact_fused_brute_force():
    # enumerate every outlier pattern of a tiny sample
    for m, l, p in [(2, 3, 0.4), (3, 2, 0.3), (3, 3, 0.45), (4, 2, 0.2)]:
        n = m * l
        total = 0.0
        for bits in itertools.product([0, 1], repeat=n):
            counts = [sum(bits[j * l : (j + 1) * l]) for j in range(m)]
            broken = sum(2 * c >= l for c in counts)
            if 2 * broken >= m:
                total += p ** sum(bits) * (1 - p) ** (n - sum(bits))
        assert fused_break_prob_exact(m, l, p) == pytest.approx(total, rel=1e-12)


def test_binom_upper_tail_edges():
    assert binom_upper_tail(5, 0.3, 0) == 1.0
    assert binom_upper_tail(5, 0.3, 6) == 0.0


def test_monotone_in_p():
    ps = np.linspace(0.3, 0.6, 31)
    vals = [fused_break_prob_exact(10, 51, p) for p in ps]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("m,l,p", [(5, 21, 0.45), (10, 20, 0.48), (7, 9, 0.4)])
def test_simulation_matches_oracle(m, l, p):
    cfg = BreakdownConfig(n=m * l, m=m, p=p, replicates=20000, seed=3)
    exact = fused_break_prob_exact(m, l, p)
    sim = simulate_breakdown(cfg).break_fraction
    assert abs(sim - exact) <= 3 * math.sqrt(exact * (1 - exact) / cfg.replicates) + 0.005


def test_literal_walk_matches_oracle():
    m, l, p = 6, 30, 0.47
    cfg = BreakdownConfig(n=m * l, m=m, p=p, replicates=4000, seed=8, literal_walk=True)
    exact = fused_break_prob_exact(m, l, p)
    sim = simulate_breakdown(cfg).break_fraction
    assert abs(sim - exact) <= 3 * math.sqrt(exact * (1 - exact) / cfg.replicates) + 0.005


def test_u_statistic():
    rep = simulate_breakdown(BreakdownConfig(n=300, m=10, p=0.49, replicates=2000, seed=1, keep_u=True))
    u = rep.per_replicate_u
    assert u.shape == (2000,)
    assert np.all((u >= 0) & (u <= 1))
    assert rep.break_fraction == pytest.approx(np.mean(u <= 0.5))


def test_reproducible_across_workers():
    cfg = BreakdownConfig(n=3000, m=30, p=0.495, replicates=5000, seed=42, keep_u=True)
    a = simulate_breakdown(cfg, workers=1)
    b = simulate_breakdown(cfg, workers=4)
    assert a.break_fraction == b.break_fraction
    np.testing.assert_array_equal(a.per_replicate_u, b.per_replicate_u)
