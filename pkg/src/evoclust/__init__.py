"""Adaptive graph clustering with evolving neighborhood statistics."""

from .data import (
    DataError,
    Dataset,
    ScalerKind,
    SyntheticSpec,
    dev_suite,
    generate,
    load_dataset,
    loads_dataset,
    prepare,
    save_csv,
    scale,
)
from .engine import (
    NOISE,
    ClusterConfig,
    ClusterStats,
    ConfigError,
    DegenerateDataset,
    LabelArray,
    RunReport,
    cluster,
    dataset_scale,
    density_heuristic,
    l1_accept,
    l2_accept,
    shape_descriptor,
    shape_from_points,
    update_stats,
)
from .heuristics import HeuristicSet
from .knn import ExactIndex, NeighborBatch, GraphIndex, build_index, recall_at_k
from .metrics import ari, nmi
from .refine import IsotropyScore, isotropy_scores, reassign_small

__version__ = "0.1.0"

__all__ = [
    "DataError",
    "Dataset",
    "ScalerKind",
    "SyntheticSpec",
    "dev_suite",
    "generate",
    "load_dataset",
    "loads_dataset",
    "prepare",
    "save_csv",
    "scale",
    "NOISE",
    "ClusterConfig",
    "ClusterStats",
    "ConfigError",
    "DegenerateDataset",
    "LabelArray",
    "RunReport",
    "cluster",
    "dataset_scale",
    "density_heuristic",
    "l1_accept",
    "l2_accept",
    "shape_descriptor",
    "shape_from_points",
    "update_stats",
    "HeuristicSet",
    "ExactIndex",
    "NeighborBatch",
    "GraphIndex",
    "build_index",
    "recall_at_k",
    "ari",
    "nmi",
    "IsotropyScore",
    "isotropy_scores",
    "reassign_small",
]
