# %% [markdown]
# # When does fusing block estimates break down?
#
# Split n observations into m blocks of l = n/m. Each observation is an
# outlier with probability p. A block estimate breaks once half its points
# are outliers, and the fused estimate breaks once half the blocks do.
# This walks through the simulated fractions next to the exact tail.

# %%
from robfusion.breakdown import (
    BreakdownConfig,
    block_break_bound,
    block_break_prob,
    fused_break_prob_exact,
    simulate_breakdown,
)

n = 30000
ps = (0.45, 0.49, 0.495, 0.499)

# %% [markdown]
# Simulated vs exact, 5000 replicates per cell. Near p = 1/2 more blocks
# means more coin flips landing on the wrong side, so breakdown grows with m.

# %%
print(f"{'m':>5} " + " ".join(f"{p:>16}" for p in ps))
for m in (5, 10, 30, 50, 100, 150):
    cells = []
    for p in ps:
        sim = simulate_breakdown(BreakdownConfig(n=n, m=m, p=p, replicates=5000, seed=1)).break_fraction
        cells.append(f"{sim:.4f}/{fused_break_prob_exact(m, n // m, p):.4f}")
    print(f"{m:>5} " + " ".join(f"{c:>16}" for c in cells))

# %% [markdown]
# The per-block probability against its Hoeffding bound. The bound is loose
# but already tiny away from 1/2.

# %%
for l in (200, 600, 3000):
    for p in (0.45, 0.49):
        print(f"l={l:5d} p={p}: exact {block_break_prob(l, p):.3e}  bound {block_break_bound(l, p):.3e}")
