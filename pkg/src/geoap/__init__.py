"""geoap: exemplar clustering by affinity message passing, with optional
network-topology constraints, label smoothing, evaluation metrics, and
experiment drivers (threshold/cluster-count sweeps, relabeling ablation).
"""

from .data import Dataset, load_dataset, load_result, write_result
from .engine import (
    ClusteringResult,
    EngineConfig,
    MessageState,
    Mode,
    assign_geometric,
    damp,
    estimate_exemplars,
    net_similarity,
    run,
    smooth_labels,
    update_availabilities_geometric,
    update_availabilities_standard,
    update_responsibilities,
)
from .errors import (
    CalibrationError,
    DataFormatError,
    DivergenceError,
    GeoapError,
    NonConvergenceError,
)
from .graph import (
    Graph,
    NeighborhoodMask,
    TopoDistance,
    UNREACHABLE,
    adjacency_profile,
    cosine_topo_distance,
    graph_power_reach,
    jaccard_distance,
    neighborhood_mask,
    permute_vertices,
    shortest_path_hops,
)
from .metrics import MatchingMatrix, classification_rate, macro_f1, matching_matrix, nmi
from .oracle import brute_force_optimum
from .similarity import (
    FeatureMetric,
    SimilarityMatrix,
    build_similarity,
    calibrate_preference,
    feature_distance,
    median_offdiagonal,
    set_shared_preference,
)
from .sweeps import (
    AblationReport,
    SweepReport,
    ablation,
    evaluate_labels,
    prepare_similarity,
    resolve_and_run,
    sweep_k,
    sweep_tau,
)

__version__ = "0.1.0"

__all__ = [
    "AblationReport",
    "CalibrationError",
    "ClusteringResult",
    "DataFormatError",
    "Dataset",
    "DivergenceError",
    "EngineConfig",
    "FeatureMetric",
    "GeoapError",
    "Graph",
    "MatchingMatrix",
    "MessageState",
    "Mode",
    "NeighborhoodMask",
    "NonConvergenceError",
    "SimilarityMatrix",
    "SweepReport",
    "TopoDistance",
    "UNREACHABLE",
    "ablation",
    "adjacency_profile",
    "assign_geometric",
    "brute_force_optimum",
    "build_similarity",
    "calibrate_preference",
    "classification_rate",
    "cosine_topo_distance",
    "damp",
    "estimate_exemplars",
    "evaluate_labels",
    "feature_distance",
    "graph_power_reach",
    "jaccard_distance",
    "load_dataset",
    "load_result",
    "macro_f1",
    "matching_matrix",
    "median_offdiagonal",
    "neighborhood_mask",
    "net_similarity",
    "nmi",
    "permute_vertices",
    "prepare_similarity",
    "resolve_and_run",
    "run",
    "set_shared_preference",
    "shortest_path_hops",
    "smooth_labels",
    "sweep_k",
    "sweep_tau",
    "update_availabilities_geometric",
    "update_availabilities_standard",
    "update_responsibilities",
    "write_result",
]
