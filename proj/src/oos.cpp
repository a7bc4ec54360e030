#include "lfsg/oos.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <limits>

#include "lfsg/algos.hpp"
#include "lfsg/errors.hpp"

namespace lfsg {
namespace {

std::vector<std::vector<int>> members_by_cluster(const Labels& labels,
                                                 Eigen::Index n_cols,
                                                 const char* who) {
  if (labels.size() != static_cast<std::size_t>(n_cols))
    throw LengthMismatch(std::string(who) + ": labels/sample count differ");
  int C = 0;
  for (const int l : labels) {
    if (l < 0) throw InvalidSpec(std::string(who) + ": negative label");
    C = std::max(C, l + 1);
  }
  std::vector<std::vector<int>> members(static_cast<std::size_t>(C));
  for (int j = 0; j < static_cast<int>(labels.size()); ++j)
    members[static_cast<std::size_t>(labels[static_cast<std::size_t>(j)])]
        .push_back(j);
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (members[c].empty())
      throw EmptyCluster(std::string(who) + ": cluster " +
                         std::to_string(c + 1) + " has no members");
  }
  return members;
}

}  // namespace

SubspaceModel fit_subspace_model(const Matrix& X_in, const Labels& labels,
                                 int d) {
  if (X_in.size() == 0) throw EmptyMatrix("fit_subspace_model: empty data");
  if (d < 1) throw InvalidSpec("fit_subspace_model: d must be positive");
  const auto members = members_by_cluster(labels, X_in.cols(),
                                          "fit_subspace_model");

  SubspaceModel model;
  model.means.reserve(members.size());
  model.bases.reserve(members.size());
  for (const auto& idx : members) {
    Matrix block(X_in.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k)
      block.col(static_cast<Eigen::Index>(k)) = X_in.col(idx[k]);
    const Vector mean = block.rowwise().mean();
    block.colwise() -= mean;

    Eigen::BDCSVD<Matrix> svd(block, Eigen::ComputeThinU);
    const Vector& sv = svd.singularValues();
    int keep = 0;
    const int limit = std::min<int>(d, static_cast<int>(sv.size()));
    for (int j = 0; j < limit; ++j) {
      if (sv(j) > 1e-10 * sv(0)) ++keep;  // numerical rank cutoff
    }
    model.means.push_back(mean);
    model.bases.push_back(svd.matrixU().leftCols(keep));
  }
  return model;
}

OosAssignment assign_oos(const SubspaceModel& model, const Vector& x) {
  if (model.means.empty()) throw EmptyCluster("assign_oos: unfitted model");
  if (x.size() != model.means[0].size())
    throw DimensionMismatch("assign_oos: point dimension mismatch");
  OosAssignment out;
  out.distances.reserve(model.means.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < model.means.size(); ++c) {
    const Vector centered = x - model.means[c];
    const Matrix& U = model.bases[c];
    const double dist =
        U.cols() > 0 ? (centered - U * (U.transpose() * centered)).norm()
                     : centered.norm();
    out.distances.push_back(dist);
    if (dist < best) {  // strict: ties keep the smaller cluster index
      best = dist;
      out.label = static_cast<int>(c);
    }
  }
  return out;
}

Labels assign_oos_batch(const SubspaceModel& model, const Matrix& X) {
  Labels labels(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    labels[static_cast<std::size_t>(j)] = assign_oos(model, X.col(j)).label;
  return labels;
}

KernelOosModel fit_kernel_oos(const Matrix& X_in, const Labels& labels, int d,
                              double sigma2, double rank_tol) {
  if (X_in.cols() < 2) throw InvalidSpec("fit_kernel_oos: need at least two samples");
  if (rank_tol < 0.0) throw InvalidSpec("fit_kernel_oos: rank_tol must be nonnegative");
  const Eigen::Index N = X_in.cols();

  KernelOosModel model;
  model.train = X_in;
  model.sigma2 = sigma2;

  const Matrix raw = gaussian_gram(X_in, sigma2);
  model.kernel_row_mean = raw.rowwise().mean();
  const double grand_mean = model.kernel_row_mean.mean();

  // double centering: K = (I - E) raw (I - E), written entrywise so the
  // result is exactly symmetric
  Matrix K(N, N);
  for (Eigen::Index j = 0; j < N; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double v = raw(i, j) - model.kernel_row_mean(i) -
                       model.kernel_row_mean(j) + grand_mean;
      K(i, j) = v;
      K(j, i) = v;
    }
  }

  Eigen::SelfAdjointEigenSolver<Matrix> eig(K);
  if (eig.info() != Eigen::Success)
    throw EigFailure("fit_kernel_oos: eigendecomposition failed");
  const Vector& all_vals = eig.eigenvalues();  // ascending
  const double lambda_max = all_vals(N - 1);
  if (!(lambda_max > 0.0))
    throw EigFailure("fit_kernel_oos: centered kernel is numerically zero");

  int significant = 0;
  for (Eigen::Index j = 0; j < N; ++j) {
    if (all_vals(j) > rank_tol * lambda_max) ++significant;
  }
  const int R = std::min<int>(static_cast<int>(N) - 1, significant);
  if (R < 1)
    throw EigFailure("fit_kernel_oos: no usable kernel eigenvalues");

  model.eigvals.resize(R);
  model.eigvecs.resize(N, R);
  for (int j = 0; j < R; ++j) {
    const Eigen::Index src = N - 1 - j;  // descending order
    model.eigvals(j) = all_vals(src);
    Vector u = eig.eigenvectors().col(src);
    Eigen::Index arg = 0;
    u.cwiseAbs().maxCoeff(&arg);
    if (u(arg) < 0.0) u = -u;
    model.eigvecs.col(j) = u;
  }

  model.coords = model.eigvals.cwiseSqrt().asDiagonal() *
                 model.eigvecs.transpose();  // R x N
  model.coord_model = fit_subspace_model(model.coords, labels, d);
  return model;
}

Vector kernel_embed_test(const KernelOosModel& model, const Vector& x) {
  if (x.size() != model.train.rows())
    throw DimensionMismatch("kernel_embed_test: point dimension mismatch");
  const Matrix kappa =
      gaussian_cross_gram(model.train, x, model.sigma2);  // N x 1
  Vector v = kappa.col(0) - model.kernel_row_mean;
  v.array() -= v.mean();  // remove the projector's rank-one component
  return model.eigvals.cwiseSqrt().cwiseInverse().asDiagonal() *
         (model.eigvecs.transpose() * v);
}

OosAssignment assign_kernel_oos(const KernelOosModel& model, const Vector& x) {
  return assign_oos(model.coord_model, kernel_embed_test(model, x));
}

Labels assign_kernel_oos_batch(const KernelOosModel& model, const Matrix& X) {
  Labels labels(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    labels[static_cast<std::size_t>(j)] =
        assign_kernel_oos(model, X.col(j)).label;
  return labels;
}

}  // namespace lfsg
