#include "lfsg/algos.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "lfsg/errors.hpp"
#include "lfsg/graph.hpp"

namespace lfsg {
namespace {

// Shared SPD solve for Z = (G + lambda I)^{-1} G with a residual check.
Matrix ridge_solve(const Matrix& G, double lambda, const char* who) {
  const Eigen::Index n = G.rows();
  Matrix A = G;
  A.diagonal().array() += lambda;
  Eigen::LLT<Matrix> llt(A);
  if (llt.info() != Eigen::Success)
    throw SolveFailure(std::string(who) + ": Cholesky factorization failed");
  Matrix Z = llt.solve(G);
  const double residual = (A * Z - G).norm();
  if (residual > 1e-8 * std::max(G.norm(), 1.0))
    throw SolveFailure(std::string(who) + ": solve residual too large");
  (void)n;
  return Z;
}

}  // namespace

Matrix lsr(const Matrix& X, double lambda) {
  if (X.size() == 0) throw EmptyMatrix("lsr: empty data");
  if (lambda <= 0.0) throw InvalidSpec("lsr: lambda must be positive");
  const Matrix G = X.transpose() * X;
  return ridge_solve(G, lambda, "lsr");
}

Matrix gaussian_gram(const Matrix& X, double sigma2) {
  if (X.size() == 0) throw EmptyMatrix("gaussian_gram: empty data");
  if (sigma2 <= 0.0) throw InvalidSpec("gaussian_gram: sigma2 must be positive");
  const Eigen::Index n = X.cols();
  const Vector sq = X.colwise().squaredNorm();
  Matrix K(n, n);
  const double inv = 1.0 / (2.0 * sigma2);
  for (Eigen::Index j = 0; j < n; ++j) {
    K(j, j) = 1.0;
    for (Eigen::Index i = 0; i < j; ++i) {
      double d2 = sq(i) + sq(j) - 2.0 * X.col(i).dot(X.col(j));
      if (d2 < 0.0) d2 = 0.0;  // guard fp cancellation
      const double k = std::exp(-d2 * inv);
      K(i, j) = k;
      K(j, i) = k;
    }
  }
  return K;
}

Matrix gaussian_cross_gram(const Matrix& A, const Matrix& B, double sigma2) {
  if (A.size() == 0 || B.size() == 0)
    throw EmptyMatrix("gaussian_cross_gram: empty data");
  if (A.rows() != B.rows())
    throw DimensionMismatch("gaussian_cross_gram: feature dims differ");
  if (sigma2 <= 0.0)
    throw InvalidSpec("gaussian_cross_gram: sigma2 must be positive");
  const Vector sa = A.colwise().squaredNorm();
  const Vector sb = B.colwise().squaredNorm();
  Matrix K(A.cols(), B.cols());
  const double inv = 1.0 / (2.0 * sigma2);
  for (Eigen::Index j = 0; j < B.cols(); ++j) {
    for (Eigen::Index i = 0; i < A.cols(); ++i) {
      double d2 = sa(i) + sb(j) - 2.0 * A.col(i).dot(B.col(j));
      if (d2 < 0.0) d2 = 0.0;
      K(i, j) = std::exp(-d2 * inv);
    }
  }
  return K;
}

Matrix kernel_lsr(const Matrix& K, double lambda) {
  if (K.size() == 0) throw EmptyMatrix("kernel_lsr: empty Gram matrix");
  if (K.rows() != K.cols()) throw NonSquare("kernel_lsr: K must be square");
  if (lambda <= 0.0) throw InvalidSpec("kernel_lsr: lambda must be positive");
  return ridge_solve(K, lambda, "kernel_lsr");
}

ClusterResult gf_lsr_affinity(const Matrix& X, const ScAlgorithmSpec& spec) {
  if (spec.filter_order < 0)
    throw InvalidSpec("gf_lsr: filter_order must be nonnegative");
  if (spec.gf_max_iter < 1)
    throw InvalidSpec("gf_lsr: gf_max_iter must be positive");
  if (spec.gf_epsilon < 0.0)
    throw InvalidSpec("gf_lsr: gf_epsilon must be nonnegative");

  ClusterResult result;
  Matrix X_filtered = X;  // round 1 sees the raw data
  Matrix W_prev;
  for (int t = 1; t <= spec.gf_max_iter; ++t) {
    result.representation = lsr(X_filtered, spec.lambda);
    result.affinity = affinity_from_representation(result.representation);
    result.iterations = t;
    if (t >= 2 &&
        (result.affinity - W_prev).squaredNorm() <= spec.gf_epsilon) {
      break;
    }
    if (t == spec.gf_max_iter) break;
    const AffinityGraph g = build_graph(result.affinity);
    X_filtered = graph_filter(X, g.L, spec.filter_order);
    W_prev = result.affinity;
  }
  return result;
}

ClusterResult cluster(const Matrix& X, int clusters,
                      const ScAlgorithmSpec& spec, std::uint64_t seed,
                      int kmeans_restarts) {
  if (X.size() == 0) throw EmptyMatrix("cluster: empty data");
  if (clusters < 1 || clusters > X.cols())
    throw InvalidSpec("cluster: clusters must be in [1, N]");

  ClusterResult result;
  if (spec.kind == "lsr") {
    result.representation = lsr(X, spec.lambda);
    result.affinity = affinity_from_representation(result.representation);
    result.iterations = 1;
  } else if (spec.kind == "klsr") {
    const Matrix K = gaussian_gram(X, spec.sigma2);
    result.representation = kernel_lsr(K, spec.lambda);
    result.affinity = affinity_from_representation(result.representation);
    result.iterations = 1;
  } else if (spec.kind == "gf_lsr") {
    result = gf_lsr_affinity(X, spec);
  } else if (spec.kind == "ssc" || spec.kind == "s0l0") {
    throw NotImplemented("cluster: '" + spec.kind + "' is reserved but not available");
  } else {
    throw InvalidSpec("cluster: unknown algorithm kind '" + spec.kind + "'");
  }

  const AffinityGraph g = build_graph(result.affinity);
  result.labels = spectral_cluster(g.L, clusters, seed, kmeans_restarts);
  return result;
}

}  // namespace lfsg
