#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lfsg/algos.hpp"
#include "lfsg/data.hpp"
#include "lfsg/hpo.hpp"

namespace lfsg {

enum class BenchMode { Lfsg, Oracle, Both };

/// Repeated-split benchmark configuration. grid_second empty means a
/// single-hyperparameter search over lambda; otherwise the coordinate
/// scheme runs with the second grid bound to sigma2 (klsr) or the filter
/// order (gf_lsr, values rounded to integers).
struct BenchConfig {
  std::string matrix_path;
  std::string labels_path;
  ScAlgorithmSpec algo;
  HyperGrid grid_lambda;
  HyperGrid grid_second;
  MetricKind metric = MetricKind::ACC;
  int runs = 25;
  double in_fraction = 0.5;
  int subspace_dim = 9;
  std::uint64_t seed = 0;
  BenchMode mode = BenchMode::Both;
  LfsgConfig search;
  int threads = 1;
  int kmeans_restarts = 10;
};

struct RunOutcome {
  int run = 0;  // 1-based index; run seed = config.seed + run - 1
  bool failed = false;
  std::string error;
  bool converged = true;
  double lambda = 0.0;
  double param2 = 0.0;   // NaN for single-grid configs
  double acc_in = 0.0, nmi_in = 0.0, f1_in = 0.0;
  double acc_out = 0.0, nmi_out = 0.0, f1_out = 0.0;
  bool has_oos = false;  // false for gf_lsr (no out-of-sample path)
};

struct BenchReport {
  BenchConfig config;
  int data_rows = 0;
  int data_cols = 0;
  int clusters = 0;
  std::vector<RunOutcome> lfsg_runs;
  std::vector<RunOutcome> oracle_runs;

  /// Fixed-column CSV (schema tag in every row): per-run rows, then
  /// mean/std rows per mode, then a rank-sum row in mode both.
  std::string to_csv() const;

  /// Human-readable digest of the same numbers.
  std::string to_text() const;
};

/// Loads the configured data and runs the full protocol: per run, split
/// in/out (seed + run index), search hyperparameters on the in-sample
/// half per mode, score in-sample labels against truth, fit the subspace
/// model on the predicted labels, assign and score the held-out half.
/// Failing runs are marked and do not stop the remaining runs. Runs execute
/// concurrently when config.threads > 1 with output identical to serial.
BenchReport run_bench(const BenchConfig& config);
BenchReport run_bench(const BenchConfig& config, const LabeledData& data);

}  // namespace lfsg
