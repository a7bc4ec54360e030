#include "lfsg/hpo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <thread>
#include <tuple>
#include <unordered_set>

#include "lfsg/errors.hpp"

namespace lfsg {
namespace {

std::uint64_t bit_key(double v) {
  std::uint64_t k;
  std::memcpy(&k, &v, sizeof k);
  return k;
}

void validate_config(const LfsgConfig& config) {
  if (config.epsilon <= 0.0)
    throw InvalidSpec("hpo: epsilon must be positive");
  if (config.max_iterations < 1)
    throw InvalidSpec("hpo: max_iterations must be positive");
}

}  // namespace

void validate_grid(const HyperGrid& grid) {
  if (grid.values.size() < 2)
    throw InvalidSpec("hpo: grid needs at least two values");
  double prev = 0.0;
  for (const double v : grid.values) {
    if (!(v > prev))
      throw InvalidSpec("hpo: grid values must be positive and strictly increasing");
    prev = v;
  }
}

Evaluator::Evaluator(Fn fn, int threads)
    : fn_(std::move(fn)), threads_(std::max(1, threads)) {
  if (!fn_) throw InvalidSpec("evaluator: empty callable");
}

const Labels& Evaluator::at(double value) {
  const std::uint64_t key = bit_key(value);
  const auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  ++evals_;
  return cache_.emplace(key, fn_(value)).first->second;
}

void Evaluator::prefetch(const std::vector<double>& values) {
  std::vector<double> todo;
  std::unordered_set<std::uint64_t> queued;
  for (const double v : values) {
    const std::uint64_t key = bit_key(v);
    if (cache_.find(key) != cache_.end()) continue;
    if (!queued.insert(key).second) continue;
    todo.push_back(v);
  }
  if (todo.empty()) return;
  if (threads_ <= 1 || todo.size() == 1) {
    for (const double v : todo) at(v);
    return;
  }

  std::vector<Labels> results(todo.size());
  std::atomic<std::size_t> next{0};
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(threads_), todo.size());
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([this, &todo, &results, &next] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= todo.size()) break;
        results[i] = fn_(todo[i]);
      }
    });
  }
  for (auto& t : pool) t.join();
  // insertion order is fixed by todo, so cache state matches a serial run
  for (std::size_t i = 0; i < todo.size(); ++i) {
    cache_.emplace(bit_key(todo[i]), std::move(results[i]));
    ++evals_;
  }
}

std::vector<double> grid_scan(Evaluator& ev, const HyperGrid& grid,
                              MetricKind metric) {
  validate_grid(grid);
  ev.prefetch(grid.values);
  std::vector<double> scores(grid.values.size() - 1);
  for (std::size_t i = 0; i + 1 < grid.values.size(); ++i) {
    scores[i] =
        metric_score(metric, ev.at(grid.values[i]), ev.at(grid.values[i + 1]));
  }
  return scores;
}

std::size_t locate_max_subinterval(const std::vector<double>& scores) {
  if (scores.empty())
    throw EmptySample("locate_max_subinterval: no scores");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;  // strict: keeps the first max
  }
  return best;
}

std::pair<double, double> refine_interval(const Interval& iv, double h12,
                                          double h23, double h34) {
  if (h12 >= h23 && h12 >= h34) return {iv.l1, iv.l2};
  if (h23 >= h12 && h23 >= h34) return {iv.l2, iv.l3};
  return {iv.l3, iv.l4};
}

namespace {

// Shared refinement driver. score3/score2 produce (h12,h23,h34) or
// (h12,h23) for the current interval points; they also evaluate any new
// points through the evaluator's cache.
template <typename Score3, typename Score2>
void refine_loop(HpoResult& result, double lo, double hi,
                 const LfsgConfig& config, Score3&& score3, Score2&& score2) {
  bool converged = (hi - lo) / lo <= config.epsilon;
  if (!converged) {
    for (int t = 1; t <= config.max_iterations; ++t) {
      TraceRecord rec;
      rec.iteration = t;
      rec.l1 = lo;
      rec.l4 = hi;
      double new_lo, new_hi;
      if (config.split_mode == SplitMode::Thirds) {
        const double l2 = (2.0 * lo + hi) / 3.0;
        const double l3 = (lo + 2.0 * hi) / 3.0;
        rec.l2 = l2;
        rec.l3 = l3;
        const auto [h12, h23, h34] = score3(lo, l2, l3, hi);
        rec.h12 = h12;
        rec.h23 = h23;
        rec.h34 = h34;
        std::tie(new_lo, new_hi) = refine_interval({lo, l2, l3, hi}, h12, h23, h34);
      } else {
        const double mid = (lo + hi) / 2.0;
        rec.l2 = mid;
        rec.l3 = mid;
        const auto [h12, h23] = score2(lo, mid, hi);
        rec.h12 = h12;
        rec.h23 = h23;
        rec.h34 = std::numeric_limits<double>::quiet_NaN();
        if (h12 >= h23) {
          new_lo = lo;
          new_hi = mid;
        } else {
          new_lo = mid;
          new_hi = hi;
        }
      }
      result.trace.push_back(rec);
      const double prev_lo = lo;
      lo = new_lo;
      hi = new_hi;
      // relative width against the interval's left endpoint BEFORE this step
      if ((hi - lo) / prev_lo <= config.epsilon) {
        converged = true;
        break;
      }
    }
  }
  result.converged = converged;
  result.optimum = (lo + hi) / 2.0;
}

}  // namespace

HpoResult lfsg_search_1d(Evaluator& ev, const HyperGrid& grid,
                         const LfsgConfig& config) {
  validate_config(config);
  const int start_evals = ev.evaluations();

  HpoResult result;
  result.grid_scores = grid_scan(ev, grid, config.metric);
  const std::size_t best = locate_max_subinterval(result.grid_scores);
  result.grid_argmax = grid.values[best];

  const auto pair_score = [&](double a, double b) {
    return metric_score(config.metric, ev.at(a), ev.at(b));
  };
  refine_loop(
      result, grid.values[best], grid.values[best + 1], config,
      [&](double l1, double l2, double l3, double l4) {
        ev.prefetch({l2, l3});
        return std::tuple{pair_score(l1, l2), pair_score(l2, l3),
                          pair_score(l3, l4)};
      },
      [&](double l1, double mid, double l3) {
        ev.prefetch({mid});
        return std::tuple{pair_score(l1, mid), pair_score(mid, l3)};
      });

  result.final_labels = ev.at(result.optimum);
  result.evaluations = ev.evaluations() - start_evals;
  return result;
}

Hpo2dResult lfsg_search_2d(const std::function<Labels(double, double)>& ev2,
                           const HyperGrid& grid_a, const HyperGrid& grid_b,
                           const LfsgConfig& config, int threads) {
  if (!ev2) throw InvalidSpec("lfsg_search_2d: empty callable");
  validate_grid(grid_a);
  validate_grid(grid_b);

  // preset the second hyperparameter at the middle grid value (1-based
  // index ceil(L/2))
  const std::size_t L = grid_b.values.size();
  const double b_preset = grid_b.values[(L + 1) / 2 - 1];

  Hpo2dResult out;
  Evaluator ev_a([&ev2, b_preset](double a) { return ev2(a, b_preset); },
                 threads);
  out.stage_a = lfsg_search_1d(ev_a, grid_a, config);
  out.a_opt = out.stage_a.optimum;

  const double a_fixed = out.a_opt;
  Evaluator ev_b([&ev2, a_fixed](double b) { return ev2(a_fixed, b); },
                 threads);
  out.stage_b = lfsg_search_1d(ev_b, grid_b, config);
  out.b_opt = out.stage_b.optimum;
  return out;
}

HpoResult oracle_grid_search(Evaluator& ev, const HyperGrid& grid,
                             const Labels& truth, const LfsgConfig& config) {
  validate_config(config);
  validate_grid(grid);
  if (truth.empty()) throw LengthMismatch("oracle_grid_search: empty truth");
  const int start_evals = ev.evaluations();

  // every evaluated point keeps its truth score; a subinterval's value is
  // the best score seen inside it, so the best point is never discarded
  std::map<double, double> point_scores;
  const auto score_at = [&](double v) {
    const auto it = point_scores.find(v);
    if (it != point_scores.end()) return it->second;
    const double s = metric_score(config.metric, ev.at(v), truth);
    point_scores.emplace(v, s);
    return s;
  };
  const auto range_max = [&](double a, double b) {
    double best = 0.0;
    for (auto it = point_scores.lower_bound(a);
         it != point_scores.end() && it->first <= b; ++it) {
      best = std::max(best, it->second);
    }
    return best;
  };

  HpoResult result;
  ev.prefetch(grid.values);
  result.grid_scores.reserve(grid.values.size());
  for (const double v : grid.values) result.grid_scores.push_back(score_at(v));
  const std::size_t best = locate_max_subinterval(result.grid_scores);
  result.grid_argmax = grid.values[best];

  const std::size_t left = best > 0 ? best - 1 : best;
  const std::size_t right =
      best + 1 < grid.values.size() ? best + 1 : best;

  refine_loop(
      result, grid.values[left], grid.values[right], config,
      [&](double l1, double l2, double l3, double l4) {
        ev.prefetch({l2, l3});
        score_at(l2);
        score_at(l3);
        return std::tuple{range_max(l1, l2), range_max(l2, l3),
                          range_max(l3, l4)};
      },
      [&](double l1, double mid, double l3) {
        ev.prefetch({mid});
        score_at(mid);
        return std::tuple{range_max(l1, mid), range_max(mid, l3)};
      });

  result.final_labels = ev.at(result.optimum);
  result.evaluations = ev.evaluations() - start_evals;
  return result;
}

Hpo2dResult oracle_search_2d(const std::function<Labels(double, double)>& ev2,
                             const HyperGrid& grid_a, const HyperGrid& grid_b,
                             const Labels& truth, const LfsgConfig& config,
                             int threads) {
  if (!ev2) throw InvalidSpec("oracle_search_2d: empty callable");
  validate_grid(grid_a);
  validate_grid(grid_b);

  const std::size_t L = grid_b.values.size();
  const double b_preset = grid_b.values[(L + 1) / 2 - 1];

  Hpo2dResult out;
  Evaluator ev_a([&ev2, b_preset](double a) { return ev2(a, b_preset); },
                 threads);
  out.stage_a = oracle_grid_search(ev_a, grid_a, truth, config);
  out.a_opt = out.stage_a.optimum;

  const double a_fixed = out.a_opt;
  Evaluator ev_b([&ev2, a_fixed](double b) { return ev2(a_fixed, b); },
                 threads);
  out.stage_b = oracle_grid_search(ev_b, grid_b, truth, config);
  out.b_opt = out.stage_b.optimum;
  return out;
}

std::vector<std::string> grid_spacing_check(const HyperGrid& grid,
                                            double warn_ratio) {
  validate_grid(grid);
  std::vector<std::string> warnings;
  for (std::size_t i = 0; i + 1 < grid.values.size(); ++i) {
    const double ratio = grid.values[i + 1] / grid.values[i];
    if (ratio < warn_ratio) {
      char buf[256];
      std::snprintf(buf, sizeof buf,
                    "grid values %.6g and %.6g are closely spaced (ratio "
                    "%.3g < %.3g): adjacent pseudo-labels may agree almost "
                    "perfectly regardless of quality; inspect the trace",
                    grid.values[i], grid.values[i + 1], ratio, warn_ratio);
      warnings.emplace_back(buf);
    }
  }
  return warnings;
}

std::string trace_to_csv(const std::vector<TraceRecord>& trace) {
  std::string out = "iter,l1,l2,l3,l4,h12,h23,h34\n";
  char buf[512];
  const auto metric_field = [](double v) {
    if (std::isnan(v)) return std::string("nan");
    char b[64];
    std::snprintf(b, sizeof b, "%.6f", v);
    return std::string(b);
  };
  for (const TraceRecord& r : trace) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,", r.iteration,
                  r.l1, r.l2, r.l3, r.l4);
    out += buf;
    out += metric_field(r.h12);
    out += ',';
    out += metric_field(r.h23);
    out += ',';
    out += metric_field(r.h34);
    out += '\n';
  }
  return out;
}

void write_trace_csv(const std::string& path,
                     const std::vector<TraceRecord>& trace) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << trace_to_csv(trace);
  if (!os) throw IoError("write failed for " + path);
}

}  // namespace lfsg
