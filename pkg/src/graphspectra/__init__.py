"""Spectral toolkit for compact metric graphs with delta-type vertex conditions."""

from . import errors
from .graphs import (
    MetricGraph,
    VertexCondition,
    LoopDescriptor,
    build_graph,
    parse_graph,
    load_graph,
    nk,
    delta,
    dirichlet,
    insert_trivial_vertex,
    suppress_trivial_vertices,
    find_loops,
    split_vertex,
    glue_vertices,
    perturb_lengths,
    canonical_signature,
    is_isomorphic,
)
from .secular import (
    BondIndex,
    SecularSystem,
    vertex_scattering,
    bond_scattering,
    assemble_secular_system,
    secular_value,
    secular_values,
    torus_value,
    torus_values,
    star3_dirichlet_closed_form,
    star3_neumann_closed_form,
    mandarin3_closed_form,
)
from .spectral import (
    EigenvalueRecord,
    ScanOptions,
    WeylEstimate,
    weyl_count,
    direct_matrix,
    direct_determinant,
    multiplicity_at,
    scan_spectrum,
    scan_up_to_count,
    eigenvalue_list,
)
from .eigenmode import (
    EigenFunction,
    SupportClassification,
    eigenfunctions_at,
    evaluate,
    classify_support,
    vertex_values,
    vertex_condition_residuals,
    sample_on_edges,
    synthesize_loop_state,
)
from .genericity import (
    GenericityReport,
    TrialSummary,
    ThetaPath,
    genericity_report,
    randomized_genericity_trial,
    verify_interlacing,
    pick_nonvanishing_point,
    trace_theta_path,
)
from .manifold import (
    TorusField,
    sample_field,
    classify_points,
    connected_components,
    gradient_sign_labels,
    two_coloring_consistent,
    export_mesh,
    export_field,
)
from . import corpus

__version__ = "0.1.0"
