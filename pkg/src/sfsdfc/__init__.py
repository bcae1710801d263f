"""Supervised feature selection for mixed continuous/discrete data via
density-based feature clustering."""

__version__ = "0.1.0"

from .dataset import Dataset, DatasetError, FeatureColumn, ImputePolicy, Kind, impute_missing, load_csv  # noqa: E402
from .evaluation import EvalReport, cross_validate, mean_ranks  # noqa: E402
from .fclust import Clustering, DensityParams, FeatureCluster, cluster_features  # noqa: E402
from .select import PipelineOptions, SelectionResult, run_pipeline  # noqa: E402

__all__ = [
    "Clustering",
    "Dataset",
    "DatasetError",
    "DensityParams",
    "EvalReport",
    "FeatureCluster",
    "FeatureColumn",
    "ImputePolicy",
    "Kind",
    "PipelineOptions",
    "SelectionResult",
    "cluster_features",
    "cross_validate",
    "impute_missing",
    "load_csv",
    "mean_ranks",
    "run_pipeline",
]
