"""Subspace clustering with label-free sequential hyperparameter search.

Thin wrapper over the C++ core. Matrices are numpy arrays with samples as
columns; labels are 0-based integer lists.
"""

from lfsg._core import (
    ClusterResult,
    Hpo2dResult,
    HpoResult,
    KernelOosModel,
    SubspaceModel,
    TraceRecord,
    __version__,
    acc,
    affinity_from_representation,
    assign_kernel_oos,
    assign_oos,
    bench_csv,
    cluster,
    cluster_representatives,
    config_schema,
    count_clusters,
    export_images,
    fit_kernel_oos,
    fit_subspace_model,
    gaussian_cross_gram,
    gaussian_gram,
    generate_synthetic,
    graph_filter,
    grid_spacing_check,
    hungarian,
    kernel_embed,
    kernel_lsr,
    load_labels,
    load_matrix,
    lsr,
    matricize,
    nmi,
    normalized_laplacian,
    oos_distances,
    oracle_search,
    pairwise_f1,
    ranksum,
    save_labels,
    save_matrix,
    search,
    search_dataset,
    spectral_cluster,
    spectral_embed,
    split_in_out,
)

__all__ = [
    "ClusterResult",
    "Hpo2dResult",
    "HpoResult",
    "KernelOosModel",
    "SubspaceModel",
    "TraceRecord",
    "__version__",
    "acc",
    "affinity_from_representation",
    "assign_kernel_oos",
    "assign_oos",
    "bench_csv",
    "cluster",
    "cluster_representatives",
    "config_schema",
    "count_clusters",
    "export_images",
    "fit_kernel_oos",
    "fit_subspace_model",
    "gaussian_cross_gram",
    "gaussian_gram",
    "generate_synthetic",
    "graph_filter",
    "grid_spacing_check",
    "hungarian",
    "kernel_embed",
    "kernel_lsr",
    "load_labels",
    "load_matrix",
    "lsr",
    "matricize",
    "nmi",
    "normalized_laplacian",
    "oos_distances",
    "oracle_search",
    "pairwise_f1",
    "ranksum",
    "save_labels",
    "save_matrix",
    "search",
    "search_dataset",
    "spectral_cluster",
    "spectral_embed",
    "split_in_out",
]
