"""Desk-scale workbench for countably branching trees truncated at finite
depth, recursive block graphs with multi-branch splitters, the
level-preserving projections between the two, and the quotient-map and
modulus arithmetic those objects feed.

Everything here is finite and checkable: constructions carry their own
structural reports, distances have independent oracles, and the analytic
inequalities are tested on exact rationals where the constants matter.
"""

from .errors import CapacityError, DomainError, RelationError
from .laakso_graph import (
    LaaksoGraph,
    VertexId,
    branch_level_law,
    build_laakso,
    expected_edge_count,
    expected_vertex_count,
    find_forks,
    lowest_nonzero_base3_digit,
    oracle_agreement_report,
    structure_report,
    to_dot,
    to_json_dict,
)
from .moduli import (
    LpModel,
    ModulusTable,
    auc_model,
    auc_oracle,
    aus_model,
    beta_model,
    beta_oracle,
    check_beta_leq_auc,
    composed_power_type,
    power_type_fit,
    tabulate,
)
from .quotient_analysis import (
    CoarseProfile,
    FiniteMetricSpace,
    ForkWitness,
    MetricMapTable,
    atd_violation,
    beta_bound_from_fork,
    c_atd_infinity,
    check_atd_colip,
    coarse_profile,
    cross_validate_atd,
    fork_search,
    json_ready,
    lipschitz_constant,
    quotient_moduli,
)
from .staircase import (
    StaircaseVector,
    diff_norm,
    enumerate_index_sets,
    exponent_for_radius,
    sibling_separation_report,
    step_vector,
    sup_norm,
    v_of,
    verify_biorthogonality,
    verify_prefix_exactness,
    verify_quarter_bounds,
    verify_staircase_bounds,
)
from .tree_space import (
    ROOT,
    TreeNode,
    TreeSpace,
    tree_children,
    tree_distance,
    tree_lcp,
    tree_parent,
)
from .tree_to_laakso import (
    TreeToGraphMap,
    as_map_table,
    lifted_fork,
    replay_case,
    sibling_lift_separation,
    verify_projection,
)

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "CoarseProfile",
    "DomainError",
    "FiniteMetricSpace",
    "ForkWitness",
    "LaaksoGraph",
    "LpModel",
    "MetricMapTable",
    "ModulusTable",
    "ROOT",
    "RelationError",
    "StaircaseVector",
    "TreeNode",
    "TreeSpace",
    "TreeToGraphMap",
    "VertexId",
    "as_map_table",
    "atd_violation",
    "auc_model",
    "auc_oracle",
    "aus_model",
    "beta_bound_from_fork",
    "beta_model",
    "beta_oracle",
    "branch_level_law",
    "build_laakso",
    "c_atd_infinity",
    "check_atd_colip",
    "check_beta_leq_auc",
    "coarse_profile",
    "composed_power_type",
    "cross_validate_atd",
    "diff_norm",
    "enumerate_index_sets",
    "expected_edge_count",
    "expected_vertex_count",
    "exponent_for_radius",
    "find_forks",
    "fork_search",
    "json_ready",
    "lifted_fork",
    "lipschitz_constant",
    "lowest_nonzero_base3_digit",
    "oracle_agreement_report",
    "power_type_fit",
    "quotient_moduli",
    "replay_case",
    "sibling_lift_separation",
    "sibling_separation_report",
    "step_vector",
    "structure_report",
    "sup_norm",
    "tabulate",
    "to_dot",
    "to_json_dict",
    "tree_children",
    "tree_distance",
    "tree_lcp",
    "tree_parent",
    "v_of",
    "verify_biorthogonality",
    "verify_prefix_exactness",
    "verify_projection",
    "verify_quarter_bounds",
    "verify_staircase_bounds",
]
