#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lfsg/types.hpp"

namespace lfsg {

/// Samples are columns: X is D x N, labels has N entries in [0, C).
struct LabeledData {
  Matrix X;
  Labels labels;
};

/// Parameters for the synthetic union-of-subspaces generator.
struct SyntheticSpec {
  int ambient_dim = 0;            // D
  int subspace_dim = 0;           // d, must satisfy 0 < d <= D
  int clusters = 0;               // C
  int points_per_cluster = 0;     // N_c
  double noise_sigma = 0.0;       // additive isotropic Gaussian noise
  std::uint64_t seed = 0;
};

struct Split {
  LabeledData in;   // in-sample part
  LabeledData out;  // held-out part
  std::vector<int> in_indices;   // original column index of each in-sample point
  std::vector<int> out_indices;  // original column index of each held-out point
};

/// Draws C random d-dimensional subspaces (orthonormal bases via QR of a
/// Gaussian matrix), places points_per_cluster points on each with N(0,1)
/// coordinates, then adds isotropic noise. Labels follow cluster order.
LabeledData generate_synthetic(const SyntheticSpec& spec);

/// Per-class shuffle and split: from each class, floor(fraction * count)
/// points go in-sample (at least 1 per class must land on each side).
Split split_in_out(const LabeledData& data, double in_fraction,
                   std::uint64_t seed);

// ---- serialization -------------------------------------------------------

/// CSV: one row per feature, one column per sample, no header.
Matrix load_matrix_csv(const std::string& path);
void save_matrix_csv(const std::string& path, const Matrix& X);

/// BIN: magic "LFSG", u32 LE rows (D), u32 LE cols (N), then D*N f64 LE
/// values in column-major order.
Matrix load_matrix_bin(const std::string& path);
void save_matrix_bin(const std::string& path, const Matrix& X);

/// Dispatch on extension: ".bin" binary, anything else CSV.
Matrix load_matrix(const std::string& path);
void save_matrix(const std::string& path, const Matrix& X);

/// Labels on disk are 1-based, newline separated; in memory 0-based.
Labels load_labels(const std::string& path);
void save_labels(const std::string& path, const Labels& labels);

/// Number of distinct labels; validates they form {0, ..., C-1}.
int count_clusters(const Labels& labels);

}  // namespace lfsg
