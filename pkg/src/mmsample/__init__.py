"""Sampling, discretization and diagnostics for finite metric measure spaces."""

from .errors import DomainError, MMSError, SizeGuardError, ValidationError
from .space import (
    FiniteMetricMeasureSpace,
    ValidationReport,
    ball_mass,
    ball_mass_profile,
    build_from_graph,
    build_from_matrix,
    build_from_points,
    default_radii,
    validate,
)
from .nets import (
    IntersectionPattern,
    Net,
    covering_order,
    intersection_pattern,
    minimal_epsilon_net,
    net_equivalence_check,
)
from .snowflake import (
    ChainMetricResult,
    QuasimetricMatrix,
    chain_metric,
    empirical_quasisymmetry,
    quasimetric_constant,
    quasimetric_pairs,
    quasimetric_q,
    remark_exponent_bound,
)
from .regularity import (
    AhlforsFit,
    RegularityReport,
    ahlfors_fit,
    anti_doubling_check,
    construct_doubling_measure,
    measure_doubling_constant,
    metric_doubling_constant,
    regularity_report,
    uniform_perfectness,
)
from .curvature import (
    BGReport,
    BoundsReport,
    CurvatureParams,
    bg_radii,
    bishop_gromov_test,
    bounds_report,
    cd_ahlfors_bound,
    distortion_coefficient,
    intersection_degree_bound,
    net_cardinality_bound,
    s_profile,
    same_pattern_bound,
    volume_profile,
    weighted_euclidean_ricci,
)
from .distances import (
    DiscreteMeasure,
    DistanceResult,
    dirac,
    ghp_common,
    gromov_hausdorff_bruteforce,
    hausdorff,
    measure,
    prokhorov,
    prokhorov_bruteforce,
    uniform,
    wasserstein2,
)
from .discretize import (
    Discretization,
    NerveComplex,
    covering_mesh_report,
    discretization_sequence,
    nerve_complex,
    voronoi_discretize,
)
from .embed import EmbeddingResult, distortion, embed_metric, embed_snowflake, naor_naiman_budget

__version__ = "0.1.0"
