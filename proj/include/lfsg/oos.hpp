#pragma once

#include <utility>
#include <vector>

#include "lfsg/types.hpp"

namespace lfsg {

/// Per-cluster mean and orthonormal basis of the centered cluster block.
/// Basis width is min(requested d, numerical rank).
struct SubspaceModel {
  std::vector<Vector> means;   // one length-D mean per cluster
  std::vector<Matrix> bases;   // D x d_c, orthonormal columns
};

/// Center each cluster, SVD it, keep the leading left singular vectors
/// whose singular value exceeds 1e-10 of the largest.
SubspaceModel fit_subspace_model(const Matrix& X_in, const Labels& labels,
                                 int d);

struct OosAssignment {
  int label = 0;
  std::vector<double> distances;  // point-to-subspace distance per cluster
};

/// Distance to cluster c is the residual of projecting x - mean_c onto
/// basis_c; the smallest distance wins, ties to the smallest index.
OosAssignment assign_oos(const SubspaceModel& model, const Vector& x);

/// Batch version, one column of X per assignment.
Labels assign_oos_batch(const SubspaceModel& model, const Matrix& X);

/// Kernel-space analogue: eigendecompose the doubly centered Gaussian Gram
/// matrix, embed training points as Y = Lambda^{1/2} U^T, fit the subspace
/// model on Y, and embed test points through the same projection.
struct KernelOosModel {
  Matrix train;            // training columns, kept for kernel evaluations
  double sigma2 = 1.0;
  Matrix eigvecs;          // N x R
  Vector eigvals;          // R positive values, descending
  Matrix coords;           // Y, R x N
  SubspaceModel coord_model;
  Vector kernel_row_mean;  // (1/N) * uncentered_gram * ones
};

KernelOosModel fit_kernel_oos(const Matrix& X_in, const Labels& labels, int d,
                              double sigma2, double rank_tol = 1e-12);

/// Embed one test point into the training eigenspace.
Vector kernel_embed_test(const KernelOosModel& model, const Vector& x);

OosAssignment assign_kernel_oos(const KernelOosModel& model, const Vector& x);

Labels assign_kernel_oos_batch(const KernelOosModel& model, const Matrix& X);

}  // namespace lfsg
