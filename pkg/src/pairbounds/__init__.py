"""Bounds on ``P(at least k of n pairwise independent Bernoulli events)``.

Closed-form, ordered and exact-LP bounds, the distributions that attain
the tight ones, and a brute-force LP oracle that certifies them.
"""

from .applications import (
    BottleneckResult,
    FeasibleSet,
    bottleneck_approx,
    correlation_gap,
    improvement_scan,
    ratio_boole_over_tight,
    ratio_scan,
)
from .closed import (
    UPPER_METHODS,
    almost_identical_tight,
    boole_union,
    boros_prekopa,
    boros_prekopa_from_moments,
    chebyshev,
    frechet_intersection_lower,
    identical_tight,
    identical_tight_lower,
    intersection_tight_lower,
    ordered_bp,
    ordered_chebyshev,
    ordered_sss,
    ruger,
    sss,
    tight_instance_check,
    tightened_ordered,
    union_tight,
)
from .core import (
    BivariateSpec,
    BoundReport,
    JointDistribution,
    LevelDistribution,
    MarginalVector,
    PartialMoments,
    identical,
    partial_moments,
    validate_marginals,
)
from .errors import *  # noqa: F401,F403
from .extremal import (
    MomentCheckReport,
    build_almost_identical_extremal,
    build_complement_scaled,
    build_identical_extremal,
    build_intersection_extremal,
    build_scaled_bivariate,
    build_union_extremal,
    verify_distribution,
)
from .lp import (
    DualSolution,
    LpOutcome,
    check_bivariate_feasibility,
    check_dual_feasible,
    solve_aggregated_twise,
    solve_exact,
    star_tree_dual,
)

__version__ = "0.1.0"
