#pragma once

#include <cstdint>
#include <string>

#include "lfsg/types.hpp"

namespace lfsg {

/// Ridge-regularized self-expressive coefficients:
///   Z = (X^T X + lambda I)^{-1} X^T X
/// solved as an SPD system (Cholesky). lambda must be positive.
Matrix lsr(const Matrix& X, double lambda);

/// Gaussian Gram matrix K_ij = exp(-||x_i - x_j||^2 / (2 sigma2)).
/// Samples are columns of X; sigma2 is the squared bandwidth.
Matrix gaussian_gram(const Matrix& X, double sigma2);

/// Cross Gram matrix between column sets: K_ij = k(a_i, b_j).
Matrix gaussian_cross_gram(const Matrix& A, const Matrix& B, double sigma2);

/// Kernelized form: Z = (K + lambda I)^{-1} K for a PSD Gram matrix K.
Matrix kernel_lsr(const Matrix& K, double lambda);

/// Selects algorithm and hyperparameters for `cluster`.
/// kind: "lsr", "klsr", "gf_lsr" ("ssc" and "s0l0" are reserved and reject).
struct ScAlgorithmSpec {
  std::string kind = "lsr";
  double lambda = 1.0;
  double sigma2 = 1.0;     // klsr only
  int filter_order = 1;    // gf_lsr only, the k in (I - L/2)^k
  double gf_epsilon = 1e-4;
  int gf_max_iter = 50;
};

struct ClusterResult {
  Labels labels;
  Matrix affinity;        // final W
  Matrix representation;  // final Z
  int iterations = 1;     // gf_lsr refinement count; 1 for one-shot methods
};

/// Iteratively refined affinity: each round fits LSR on the filtered data,
/// rebuilds the graph, and re-filters the ORIGINAL X with the new Laplacian.
/// Stops when ||W_t - W_{t-1}||_F^2 <= gf_epsilon or after gf_max_iter
/// rounds. Returns the last affinity, representation, and round count.
ClusterResult gf_lsr_affinity(const Matrix& X, const ScAlgorithmSpec& spec);

/// Full pipeline: representation -> affinity -> normalized Laplacian ->
/// spectral embedding -> k-means. Labels are 0-based.
ClusterResult cluster(const Matrix& X, int clusters,
                      const ScAlgorithmSpec& spec, std::uint64_t seed,
                      int kmeans_restarts = 10);

}  // namespace lfsg
