#pragma once

#include <cstdint>

#include "lfsg/types.hpp"

namespace lfsg {

struct AffinityGraph {
  Matrix W;        // symmetric nonnegative affinity, zero diagonal untouched
  Vector degrees;  // row sums of W
  Matrix L;        // normalized Laplacian I - D^{-1/2} W D^{-1/2}
};

/// W = (|Z| + |Z^T|) / 2. Exact symmetry holds bit-for-bit because each
/// entry pair is computed from the same commutative expression.
Matrix affinity_from_representation(const Matrix& Z);

/// Degrees, then L = I - D^{-1/2} W D^{-1/2}. Rows with zero degree keep
/// their identity row (isolated vertices). L is exactly symmetric.
AffinityGraph build_graph(const Matrix& W);

/// X_filtered^T = (I - L/2)^k X^T applied as k repeated multiplications.
/// k = 0 returns X unchanged.
Matrix graph_filter(const Matrix& X, const Matrix& L, int k);

struct SpectralEmbedding {
  Matrix coords;       // N x C, rows unit norm
  Vector eigenvalues;  // the C smallest eigenvalues of L, ascending
};

/// Eigenvectors of the C smallest eigenvalues of symmetric L, each with its
/// largest-magnitude entry made positive, rows normalized to unit length.
/// Rows whose norm is <= 1e-12 are replaced by the constant unit vector.
SpectralEmbedding spectral_embed(const Matrix& L, int clusters);

struct KmeansResult {
  Labels labels;
  Matrix centers;  // C x dim, one row per cluster
  double wcss = 0.0;
  int iterations = 0;
};

/// Lloyd iterations with k-means++ seeding; `restarts` independent runs,
/// best within-cluster sum of squares wins (ties keep the earlier run).
/// Points are rows of `points`. Empty clusters are reseeded with the point
/// farthest from its center.
KmeansResult kmeans(const Matrix& points, int clusters, std::uint64_t seed,
                    int restarts = 10, int max_iterations = 300);

/// spectral_embed followed by kmeans on the embedding rows.
Labels spectral_cluster(const Matrix& L, int clusters, std::uint64_t seed,
                        int restarts = 10);

}  // namespace lfsg
