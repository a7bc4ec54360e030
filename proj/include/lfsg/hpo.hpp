#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lfsg/metrics.hpp"
#include "lfsg/types.hpp"

namespace lfsg {

/// Strictly increasing positive hyperparameter values, at least two.
struct HyperGrid {
  std::vector<double> values;
};

void validate_grid(const HyperGrid& grid);

enum class SplitMode { Thirds, Halves };

struct LfsgConfig {
  MetricKind metric = MetricKind::ACC;
  double epsilon = 0.001;        // relative-width stopping threshold
  SplitMode split_mode = SplitMode::Thirds;
  int max_iterations = 60;       // refinement cap; hitting it flags the result
  double spacing_warn_ratio = 2.0;
};

/// Pure mapping hyperparameter -> pseudo-labels, memoized by the exact bit
/// pattern of the value. The callable must be referentially transparent
/// (fixed data, cluster count, and seed baked in); cache reuse and the
/// parallel prefetch below both rely on that.
class Evaluator {
 public:
  using Fn = std::function<Labels(double)>;

  explicit Evaluator(Fn fn, int threads = 1);

  /// Evaluate through the cache. References stay valid across later calls.
  const Labels& at(double value);

  /// Evaluate any uncached values, in parallel when threads > 1. Results
  /// are bit-identical to serial evaluation (purity contract).
  void prefetch(const std::vector<double>& values);

  int evaluations() const { return evals_; }
  int threads() const { return threads_; }

 private:
  Fn fn_;
  int threads_;
  std::unordered_map<std::uint64_t, Labels> cache_;
  int evals_ = 0;
};

/// One refinement iteration as serialized to the trace CSV. In halves mode
/// l2 = l3 = the midpoint and h34 is NaN.
struct TraceRecord {
  int iteration = 0;
  double l1 = 0, l2 = 0, l3 = 0, l4 = 0;
  double h12 = 0, h23 = 0, h34 = 0;
};

struct HpoResult {
  double optimum = 0.0;        // midpoint of the final interval
  Labels final_labels;         // evaluator output at the optimum
  std::vector<TraceRecord> trace;
  int evaluations = 0;         // SC runs consumed by this search
  bool converged = true;       // false when the iteration cap was hit
  std::vector<double> grid_scores;  // scan scores (pairwise, or per-point for the oracle)
  double grid_argmax = 0.0;    // best grid value before refinement
};

/// scores[i] = h(y(grid[i]), y(grid[i+1])); each grid point evaluated once.
std::vector<double> grid_scan(Evaluator& ev, const HyperGrid& grid,
                              MetricKind metric);

/// Smallest index attaining the maximum.
std::size_t locate_max_subinterval(const std::vector<double>& scores);

struct Interval {
  double l1 = 0, l2 = 0, l3 = 0, l4 = 0;
};

/// The refinement rule chain; ties resolve to the earliest branch:
/// h12 largest -> [l1,l2]; h23 -> [l2,l3]; otherwise [l3,l4].
std::pair<double, double> refine_interval(const Interval& iv, double h12,
                                          double h23, double h34);

/// Label-free search: grid scan of neighbor agreement, then interval
/// refinement until (width_after / left_endpoint_before) <= epsilon or the
/// iteration cap. Result optimum is the final-interval midpoint.
HpoResult lfsg_search_1d(Evaluator& ev, const HyperGrid& grid,
                         const LfsgConfig& config);

struct Hpo2dResult {
  double a_opt = 0.0;
  double b_opt = 0.0;
  HpoResult stage_a;
  HpoResult stage_b;
};

/// Coordinate scheme for two hyperparameters: fix b at the middle grid
/// value (1-based index ceil(L/2)), search a; then fix a* and search b.
Hpo2dResult lfsg_search_2d(const std::function<Labels(double, double)>& ev2,
                           const HyperGrid& grid_a, const HyperGrid& grid_b,
                           const LfsgConfig& config, int threads = 1);

/// Ground-truth-driven baseline: per-point scores h(y(grid[i]), truth),
/// neighborhood of the best point, then the same interval refinement where
/// a subinterval's score is the best point score seen inside it so far.
/// grid_argmax reports the pure grid winner, optimum the refined value.
HpoResult oracle_grid_search(Evaluator& ev, const HyperGrid& grid,
                             const Labels& truth, const LfsgConfig& config);

/// Coordinate scheme for two hyperparameters with the oracle search in
/// both stages (same preset rule as lfsg_search_2d).
Hpo2dResult oracle_search_2d(const std::function<Labels(double, double)>& ev2,
                             const HyperGrid& grid_a, const HyperGrid& grid_b,
                             const Labels& truth, const LfsgConfig& config,
                             int threads = 1);

/// Advisory warnings for adjacent grid values closer than warn_ratio.
std::vector<std::string> grid_spacing_check(const HyperGrid& grid,
                                            double warn_ratio);

std::string trace_to_csv(const std::vector<TraceRecord>& trace);
void write_trace_csv(const std::string& path,
                     const std::vector<TraceRecord>& trace);

}  // namespace lfsg
