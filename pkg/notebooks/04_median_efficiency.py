# %% [markdown]
# # What does median-of-medians cost?
#
# Take n = m l observations, split into m blocks of odd size l = 2k+1, and
# take the median of block medians. For a Uniform parent the block median
# is Beta(k+1, k+1), which gives a closed form for the efficiency loss.

# %%
from robfusion.median_toy import (
    MedianLaw,
    asymptotic_variances,
    simulate_variance_ratio,
    uniform_relative_efficiency,
)

# %%
for k in (0, 1, 2, 3, 5, 10):
    closed = uniform_relative_efficiency(k)
    mc = simulate_variance_ratio(k=k, m=501, replicates=20_000, seed=k)
    print(f"k={k:2d} l={2 * k + 1:2d}  closed {closed:.4f}  simulated {mc:.4f}")

# %% [markdown]
# The efficiency tends to 2/pi as blocks grow. A Gaussian parent gives the
# same picture through the general formula.

# %%
law = MedianLaw.normal(3)
v = asymptotic_variances(law, n=7 * 100, m=100)
print(v, v[0] / v[1])
