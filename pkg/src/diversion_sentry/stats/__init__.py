from .clustering import (
    ClusterAssignment,
    ClusteringError,
    EmbeddingModel,
    StandardEmbedding,
    embed,
    kmeans,
    select_m,
    silhouette,
    silhouette_sweep,
)
from .gaussian import EstimationError, GaussianParams, fit_gaussian
from .kde import KernelCdf, kernel_cdf_eval, ks_distance, silverman_bandwidth
from .mixture import GaussianMixture, fit_gmm, select_gmm_bic

__all__ = [
    "ClusterAssignment",
    "ClusteringError",
    "EmbeddingModel",
    "EstimationError",
    "GaussianMixture",
    "GaussianParams",
    "KernelCdf",
    "StandardEmbedding",
    "embed",
    "fit_gaussian",
    "fit_gmm",
    "kernel_cdf_eval",
    "kmeans",
    "ks_distance",
    "select_gmm_bic",
    "select_m",
    "silhouette",
    "silhouette_sweep",
    "silverman_bandwidth",
]
