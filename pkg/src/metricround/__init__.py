"""Roundness, generalized roundness and negative type of finite metric spaces."""

__version__ = "0.1.0"

from .embed import EuclideanEmbedding, embed_euclidean, verify_isometry
from .generators import (
    Dendrogram,
    LbkParams,
    WeightedTree,
    complete_binary_tree,
    cycle_metric,
    lbk_for_target,
    make_lbk,
    random_dendrogram,
    random_graph_metric,
    random_metric,
    random_tree,
    random_ultrametric,
    star_tree,
    tree_path_metric,
)
from .metric_core import ClassificationReport, FiniteMetricSpace, classify, metric_transform, validate_metric
from .negtype import (
    GeneralizedRoundnessResult,
    GramMatrix,
    NegTypeResult,
    Status,
    deza_maehara_floor,
    generalized_roundness,
    gr_violation_search,
    gram_matrix,
    negative_type_status,
    p_distance_matrix,
    sanchez_invariant,
)
from .polygonal import PolygonalEquality, find_polygonal_equality, verify_polygonal_equality
from .roundness import (
    RoundnessCheck,
    RoundnessProfile,
    is_infinite_roundness,
    roundness_exponent_check,
    roundness_profile,
)
