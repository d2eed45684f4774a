# %% [markdown]
# # Impartial trimming of covariance kernels
#
# Each curve x_i gives a rank-one kernel x_i (x) x_i. Distances between
# kernels only need norms and one inner product, so the nearest-r ball of
# every kernel is cheap to find. The trimmed estimate averages the tightest
# ball.

# %%
import numpy as np

from robfusion.datagen import KrausConfig, generate, true_cov
from robfusion.hs import cov_hs_distance
from robfusion.trimmed import TrimConfig, sample_cov, trimmed_mean

cfg = KrausConfig(n=2000, p=0.1, seed=3)
sample = generate(cfg)
truth = true_cov(cfg)

# %%
classical = sample_cov(sample)
res = trimmed_mean(sample, TrimConfig(alpha=0.2))
print("classical error:", cov_hs_distance(classical, truth))
print("trimmed error:  ", cov_hs_distance(res.estimate, truth))
print("kept", res.r, "of", sample.n, "centred on row", res.gamma)

# %% [markdown]
# The kept set should avoid the flagged outliers.

# %%
kept = np.zeros(sample.n, dtype=bool)
kept[res.kept_indices] = True
print("outliers kept:", int((kept & sample.labels).sum()), "of", int(sample.labels.sum()))

# %% [markdown]
# Scaling the outliers up does not move the estimate at all once they are
# trimmed away.

# %%
rows = sample.rows.copy()
rows[sample.labels] *= 1e4
far = trimmed_mean(type(sample)(sample.grid, rows, sample.labels), TrimConfig(alpha=0.2))
print("same estimate:", np.array_equal(far.estimate.m, res.estimate.m))
