#pragma once

#include <string>

#include "lfsg/bench.hpp"

namespace lfsg {

/// One HPO invocation on a whole dataset (no splitting): which algorithm,
/// which grid(s), and which search mode. labels_path may be empty for pure
/// label-free runs, in which case clusters must be set.
struct HpoJob {
  std::string matrix_path;
  std::string labels_path;
  ScAlgorithmSpec algo;
  HyperGrid grid_lambda;
  HyperGrid grid_second;
  MetricKind metric = MetricKind::ACC;
  int clusters = 0;  // 0: infer from labels
  std::uint64_t seed = 0;
  BenchMode mode = BenchMode::Lfsg;
  LfsgConfig search;
  int threads = 1;
  int kmeans_restarts = 10;
};

HpoJob hpo_job_from_json_text(const std::string& text);
HpoJob hpo_job_from_json_file(const std::string& path);

BenchConfig bench_config_from_json_text(const std::string& text);
BenchConfig bench_config_from_json_file(const std::string& path);

/// Documentation of both JSON document shapes with defaults.
std::string config_schema_text();

}  // namespace lfsg
