#pragma once

#include <Eigen/Dense>
#include <vector>

namespace lfsg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Cluster labels, 0-based, one per sample (column of the data matrix).
using Labels = std::vector<int>;

}  // namespace lfsg
