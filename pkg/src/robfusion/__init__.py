"""Robust fusion of subsample estimators.

Split a large sample into blocks, estimate robustly on each block, and fuse the
block estimates by taking the deepest one in spatial depth. Covariance
operators of functional data are estimated per block by impartial trimming of
rank-one Hilbert-Schmidt operators.
"""

from .breakdown import (
    BreakdownConfig,
    BreakdownReport,
    block_break_bound,
    block_break_prob,
    fused_break_prob_exact,
    simulate_breakdown,
)
from .datagen import KrausConfig, generate, true_cov
from .depth import DepthResult, deepest, spatial_depth
from .errors import (
    BoundInapplicableError,
    CapacityError,
    DegenerateLawError,
    GridMismatchError,
    InvalidLawError,
    NumericalInconsistencyError,
)
from .fusion import (
    EstimatorKind,
    FusionKind,
    FusionOutcome,
    SplitPlan,
    fuse_estimates,
    median_of_medians,
    run_fusion,
    split,
)
from .grid import FunctionalSample, Grid, GridFunction, inner, norm
from .hs import (
    CovMatrix,
    RankOneOperator,
    apply,
    cov_hs_distance,
    frobenius_hs_norm,
    hs_distance_sq,
    materialize,
)
from .median_toy import (
    MedianLaw,
    asymptotic_variances,
    beta_median_pdf,
    median_pdf,
)
from .trimmed import (
    TrimConfig,
    TrimResult,
    distance_matrix,
    pairwise_r_radius,
    sample_cov,
    trimmed_mean,
)

__version__ = "0.1.0"
