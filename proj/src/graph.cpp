#include "lfsg/graph.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "lfsg/errors.hpp"
#include "lfsg/rng.hpp"

namespace lfsg {

Matrix affinity_from_representation(const Matrix& Z) {
  if (Z.rows() != Z.cols()) throw NonSquare("affinity: Z must be square");
  const Eigen::Index n = Z.rows();
  Matrix W(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double w = (std::abs(Z(i, j)) + std::abs(Z(j, i))) / 2.0;
      W(i, j) = w;
      W(j, i) = w;
    }
  }
  return W;
}

AffinityGraph build_graph(const Matrix& W) {
  if (W.rows() != W.cols()) throw NonSquare("build_graph: W must be square");
  const Eigen::Index n = W.rows();
  AffinityGraph g;
  g.W = W;
  g.degrees = W.rowwise().sum();

  Vector inv_sqrt(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = g.degrees(i);
    inv_sqrt(i) = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
  }
  g.L.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      // the scale factor is formed once so (i,j) and (j,i) agree exactly
      const double s = inv_sqrt(i) * inv_sqrt(j);
      const double off = -W(i, j) * s;
      if (i == j) {
        g.L(i, i) = 1.0 + off;
      } else {
        g.L(i, j) = off;
        g.L(j, i) = off;
      }
    }
  }
  return g;
}

Matrix graph_filter(const Matrix& X, const Matrix& L, int k) {
  if (L.rows() != L.cols()) throw NonSquare("graph_filter: L must be square");
  if (X.cols() != L.rows())
    throw DimensionMismatch("graph_filter: X columns must match L order");
  if (k < 0) throw InvalidSpec("graph_filter: order must be nonnegative");
  if (k == 0) return X;
  const Matrix S =
      Matrix::Identity(L.rows(), L.cols()) - 0.5 * L;  // low-pass step
  Matrix Xt = X.transpose();
  for (int step = 0; step < k; ++step) Xt = S * Xt;
  return Xt.transpose();
}

SpectralEmbedding spectral_embed(const Matrix& L, int clusters) {
  if (L.rows() != L.cols()) throw NonSquare("spectral_embed: L must be square");
  if (clusters < 1 || clusters > L.rows())
    throw InvalidSpec("spectral_embed: clusters must be in [1, N]");

  Eigen::SelfAdjointEigenSolver<Matrix> eig(L);
  if (eig.info() != Eigen::Success)
    throw EigFailure("spectral_embed: eigendecomposition failed");

  const Eigen::Index n = L.rows();
  SpectralEmbedding emb;
  emb.eigenvalues = eig.eigenvalues().head(clusters);
  emb.coords = eig.eigenvectors().leftCols(clusters);

  // Fix each eigenvector's sign so its largest-magnitude entry is positive.
  for (int j = 0; j < clusters; ++j) {
    Eigen::Index arg = 0;
    emb.coords.col(j).cwiseAbs().maxCoeff(&arg);
    if (emb.coords(arg, j) < 0.0) emb.coords.col(j) = -emb.coords.col(j);
  }

  const double fill = 1.0 / std::sqrt(static_cast<double>(clusters));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = emb.coords.row(i).norm();
    if (norm <= 1e-12) {
      emb.coords.row(i).setConstant(fill);
    } else {
      emb.coords.row(i) /= norm;
    }
  }
  return emb;
}

namespace {

// One k-means++ seeded Lloyd run. Points are rows.
KmeansResult kmeans_once(const Matrix& points, int clusters, Rng& rng,
                         int max_iterations) {
  const Eigen::Index n = points.rows();
  const Eigen::Index dim = points.cols();

  Matrix centers(clusters, dim);
  {
    // k-means++: first center uniform, the rest D^2-weighted
    const Eigen::Index first =
        static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    centers.row(0) = points.row(first);
    Vector dist2 = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < clusters; ++c) {
      const double total = dist2.sum();
      Eigen::Index pick = 0;
      if (total > 0.0) {
        const double target = rng.uniform() * total;
        double acc = 0.0;
        pick = n - 1;
        for (Eigen::Index i = 0; i < n; ++i) {
          acc += dist2(i);
          if (acc >= target) {
            pick = i;
            break;
          }
        }
      } else {
        pick = static_cast<Eigen::Index>(
            rng.below(static_cast<std::uint64_t>(n)));
      }
      centers.row(c) = points.row(pick);
      dist2 = dist2.cwiseMin(
          (points.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }
  }

  Labels labels(static_cast<std::size_t>(n), -1);
  KmeansResult result;
  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < clusters; ++c) {
        const double d = (points.row(i) - centers.row(c)).squaredNorm();
        if (d < best_d) {  // strict: ties keep the smaller index
          best_d = d;
          best = c;
        }
      }
      if (labels[static_cast<std::size_t>(i)] != best) {
        labels[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    result.iterations = iter + 1;
    if (!changed && iter > 0) break;

    Matrix sums = Matrix::Zero(clusters, dim);
    std::vector<int> counts(static_cast<std::size_t>(clusters), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
      ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    }
    for (int c = 0; c < clusters; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
      } else {
        // reseed an empty cluster with the point farthest from its center
        Eigen::Index far = 0;
        double far_d = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double d =
              (points.row(i) -
               centers.row(labels[static_cast<std::size_t>(i)]))
                  .squaredNorm();
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        centers.row(c) = points.row(far);
        labels[static_cast<std::size_t>(far)] = c;
      }
    }
  }

  result.labels = std::move(labels);
  result.centers = std::move(centers);
  result.wcss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    result.wcss +=
        (points.row(i) -
         result.centers.row(result.labels[static_cast<std::size_t>(i)]))
            .squaredNorm();
  }
  return result;
}

}  // namespace

KmeansResult kmeans(const Matrix& points, int clusters, std::uint64_t seed,
                    int restarts, int max_iterations) {
  if (points.rows() == 0) throw EmptyMatrix("kmeans: no points");
  if (clusters < 1 || clusters > points.rows())
    throw InvalidSpec("kmeans: clusters must be in [1, N]");
  if (restarts < 1) throw InvalidSpec("kmeans: restarts must be positive");

  Rng rng(seed);
  KmeansResult best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    KmeansResult run = kmeans_once(points, clusters, rng, max_iterations);
    if (run.wcss < best.wcss) best = std::move(run);
  }
  return best;
}

Labels spectral_cluster(const Matrix& L, int clusters, std::uint64_t seed,
                        int restarts) {
  const SpectralEmbedding emb = spectral_embed(L, clusters);
  return kmeans(emb.coords, clusters, seed, restarts).labels;
}

}  // namespace lfsg
