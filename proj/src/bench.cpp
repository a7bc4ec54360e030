#include "lfsg/bench.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

#include "lfsg/errors.hpp"
#include "lfsg/metrics.hpp"
#include "lfsg/oos.hpp"

namespace lfsg {
namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string fmt(const char* format, double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string fmt_metric(double v) { return fmt("%.6f", v); }
std::string fmt_param(double v) { return fmt("%.10g", v); }

void validate_bench_config(const BenchConfig& cfg) {
  if (cfg.runs < 1) throw ConfigError("bench: runs must be >= 1");
  if (!(cfg.in_fraction > 0.0 && cfg.in_fraction < 1.0))
    throw ConfigError("bench: in_fraction must be in (0, 1)");
  if (cfg.subspace_dim < 1) throw ConfigError("bench: subspace_dim must be >= 1");
  if (cfg.threads < 1) throw ConfigError("bench: threads must be >= 1");
  if (cfg.kmeans_restarts < 1)
    throw ConfigError("bench: kmeans_restarts must be >= 1");
  validate_grid(cfg.grid_lambda);
  if (cfg.algo.kind == "ssc" || cfg.algo.kind == "s0l0")
    throw NotImplemented("bench: '" + cfg.algo.kind + "' is reserved but not available");
  if (cfg.algo.kind != "lsr" && cfg.algo.kind != "klsr" &&
      cfg.algo.kind != "gf_lsr")
    throw ConfigError("bench: unknown algorithm kind '" + cfg.algo.kind + "'");
  if (!cfg.grid_second.values.empty()) {
    validate_grid(cfg.grid_second);
    if (cfg.algo.kind == "lsr")
      throw ConfigError("bench: lsr has a single hyperparameter; drop the second grid");
  }
}

ScAlgorithmSpec spec_at(const BenchConfig& cfg, double lambda, double second,
                        bool has_second) {
  ScAlgorithmSpec s = cfg.algo;
  s.lambda = lambda;
  if (has_second) {
    if (cfg.algo.kind == "klsr") {
      s.sigma2 = second;
    } else {  // gf_lsr: the second grid carries the integer filter order
      s.filter_order = static_cast<int>(std::llround(second));
    }
  }
  return s;
}

RunOutcome mode_outcome(bool oracle_mode, const BenchConfig& cfg,
                        const Split& split, int clusters,
                        std::uint64_t run_seed, int run_index) {
  RunOutcome out;
  out.run = run_index;
  try {
    const Matrix& X_in = split.in.X;
    const bool two_grids = !cfg.grid_second.values.empty();

    double lambda_opt = 0.0;
    double param2 = kNan;
    Labels picked;
    bool converged = true;
    if (!two_grids) {
      Evaluator ev(
          [&cfg, &X_in, clusters, run_seed](double l) {
            return cluster(X_in, clusters, spec_at(cfg, l, 0.0, false),
                           run_seed, cfg.kmeans_restarts)
                .labels;
          });
      const HpoResult res =
          oracle_mode
              ? oracle_grid_search(ev, cfg.grid_lambda, split.in.labels,
                                   cfg.search)
              : lfsg_search_1d(ev, cfg.grid_lambda, cfg.search);
      lambda_opt = res.optimum;
      picked = res.final_labels;
      converged = res.converged;
    } else {
      const auto ev2 = [&cfg, &X_in, clusters, run_seed](double a, double b) {
        return cluster(X_in, clusters, spec_at(cfg, a, b, true), run_seed,
                       cfg.kmeans_restarts)
            .labels;
      };
      const Hpo2dResult res =
          oracle_mode
              ? oracle_search_2d(ev2, cfg.grid_lambda, cfg.grid_second,
                                 split.in.labels, cfg.search)
              : lfsg_search_2d(ev2, cfg.grid_lambda, cfg.grid_second,
                               cfg.search);
      lambda_opt = res.a_opt;
      param2 = cfg.algo.kind == "gf_lsr"
                   ? static_cast<double>(std::llround(res.b_opt))
                   : res.b_opt;
      picked = res.stage_b.final_labels;
      converged = res.stage_a.converged && res.stage_b.converged;
    }

    out.lambda = lambda_opt;
    out.param2 = param2;
    out.converged = converged;
    out.acc_in = acc(picked, split.in.labels);
    out.nmi_in = nmi(picked, split.in.labels);
    out.f1_in = pairwise_f1(picked, split.in.labels);

    if (cfg.algo.kind == "gf_lsr") {
      // no out-of-sample extension for the graph-filtered variant
      out.has_oos = false;
      out.acc_out = out.nmi_out = out.f1_out = kNan;
    } else if (cfg.algo.kind == "klsr") {
      const double sigma2 = two_grids ? param2 : cfg.algo.sigma2;
      const KernelOosModel model =
          fit_kernel_oos(X_in, picked, cfg.subspace_dim, sigma2);
      const Labels pred = assign_kernel_oos_batch(model, split.out.X);
      out.acc_out = acc(pred, split.out.labels);
      out.nmi_out = nmi(pred, split.out.labels);
      out.f1_out = pairwise_f1(pred, split.out.labels);
      out.has_oos = true;
    } else {
      const SubspaceModel model =
          fit_subspace_model(X_in, picked, cfg.subspace_dim);
      const Labels pred = assign_oos_batch(model, split.out.X);
      out.acc_out = acc(pred, split.out.labels);
      out.nmi_out = nmi(pred, split.out.labels);
      out.f1_out = pairwise_f1(pred, split.out.labels);
      out.has_oos = true;
    }
  } catch (const std::exception& e) {
    out.failed = true;
    out.error = e.what();
    out.lambda = out.param2 = kNan;
    out.acc_in = out.nmi_in = out.f1_in = kNan;
    out.acc_out = out.nmi_out = out.f1_out = kNan;
  }
  return out;
}

RunOutcome failed_outcome(int run_index, const std::string& message) {
  RunOutcome out;
  out.run = run_index;
  out.failed = true;
  out.error = message;
  out.lambda = out.param2 = kNan;
  out.acc_in = out.nmi_in = out.f1_in = kNan;
  out.acc_out = out.nmi_out = out.f1_out = kNan;
  return out;
}

// value extraction + aggregates over successful runs

std::vector<double> collect(const std::vector<RunOutcome>& runs,
                            double RunOutcome::*field) {
  std::vector<double> values;
  for (const RunOutcome& r : runs) {
    if (r.failed) continue;
    const double v = r.*field;
    if (!std::isnan(v)) values.push_back(v);
  }
  return values;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return kNan;
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// sample std (n-1); a single observation reports 0 by convention
double std_of(const std::vector<double>& v) {
  if (v.empty()) return kNan;
  if (v.size() == 1) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (const double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

constexpr double RunOutcome::*kFields[] = {
    &RunOutcome::lambda,  &RunOutcome::param2, &RunOutcome::acc_in,
    &RunOutcome::nmi_in,  &RunOutcome::f1_in,  &RunOutcome::acc_out,
    &RunOutcome::nmi_out, &RunOutcome::f1_out};

const char* mode_name(BenchMode m) {
  switch (m) {
    case BenchMode::Lfsg: return "lfsg";
    case BenchMode::Oracle: return "oracle";
    default: return "both";
  }
}

}  // namespace

BenchReport run_bench(const BenchConfig& config) {
  const Matrix X = load_matrix(config.matrix_path);
  const Labels truth = load_labels(config.labels_path);
  if (truth.size() != static_cast<std::size_t>(X.cols()))
    throw ConfigError("bench: label count does not match sample count");
  return run_bench(config, LabeledData{X, truth});
}

BenchReport run_bench(const BenchConfig& config, const LabeledData& data) {
  validate_bench_config(config);
  BenchReport report;
  report.config = config;
  report.data_rows = static_cast<int>(data.X.rows());
  report.data_cols = static_cast<int>(data.X.cols());
  report.clusters = count_clusters(data.labels);

  const bool do_lfsg = config.mode != BenchMode::Oracle;
  const bool do_oracle = config.mode != BenchMode::Lfsg;
  if (do_lfsg) report.lfsg_runs.resize(static_cast<std::size_t>(config.runs));
  if (do_oracle)
    report.oracle_runs.resize(static_cast<std::size_t>(config.runs));

  const auto run_one = [&](int r) {
    const std::uint64_t run_seed =
        config.seed + static_cast<std::uint64_t>(r);
    Split split;
    try {
      split = split_in_out(data, config.in_fraction, run_seed);
    } catch (const std::exception& e) {
      if (do_lfsg)
        report.lfsg_runs[static_cast<std::size_t>(r)] =
            failed_outcome(r + 1, e.what());
      if (do_oracle)
        report.oracle_runs[static_cast<std::size_t>(r)] =
            failed_outcome(r + 1, e.what());
      return;
    }
    if (do_lfsg)
      report.lfsg_runs[static_cast<std::size_t>(r)] = mode_outcome(
          false, config, split, report.clusters, run_seed, r + 1);
    if (do_oracle)
      report.oracle_runs[static_cast<std::size_t>(r)] = mode_outcome(
          true, config, split, report.clusters, run_seed, r + 1);
  };

  if (config.threads <= 1 || config.runs == 1) {
    for (int r = 0; r < config.runs; ++r) run_one(r);
  } else {
    std::atomic<int> next{0};
    const int workers = std::min(config.threads, config.runs);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const int r = next.fetch_add(1);
          if (r >= config.runs) break;
          run_one(r);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  return report;
}

std::string BenchReport::to_csv() const {
  std::string out =
      "schema,mode,run,status,converged,lambda,param2,acc_in,nmi_in,f1_in,"
      "acc_out,nmi_out,f1_out\n";

  const auto run_row = [&out](const char* mode, const RunOutcome& r) {
    out += "lfsg_bench_v1,";
    out += mode;
    out += ',' + std::to_string(r.run) + ',';
    out += r.failed ? "failed," : "ok,";
    out += r.failed ? "nan" : (r.converged ? "1" : "0");
    out += ',' + fmt_param(r.lambda) + ',' + fmt_param(r.param2);
    out += ',' + fmt_metric(r.acc_in) + ',' + fmt_metric(r.nmi_in) + ',' +
           fmt_metric(r.f1_in);
    out += ',' + fmt_metric(r.acc_out) + ',' + fmt_metric(r.nmi_out) + ',' +
           fmt_metric(r.f1_out);
    out += '\n';
  };

  const auto aggregate_rows = [&out](const char* mode,
                                     const std::vector<RunOutcome>& runs) {
    std::size_t ok = 0, converged = 0;
    for (const RunOutcome& r : runs) {
      if (r.failed) continue;
      ++ok;
      if (r.converged) ++converged;
    }
    const double conv_frac =
        ok > 0 ? static_cast<double>(converged) / static_cast<double>(ok)
               : kNan;

    out += std::string("lfsg_bench_v1,") + mode + ",mean,agg," +
           fmt_metric(conv_frac);
    for (const auto field : kFields) {
      const std::vector<double> values = collect(runs, field);
      const bool param = field == &RunOutcome::lambda || field == &RunOutcome::param2;
      out += ',' + (param ? fmt_param(mean_of(values))
                          : fmt_metric(mean_of(values)));
    }
    out += '\n';

    out += std::string("lfsg_bench_v1,") + mode + ",std,agg,nan";
    for (const auto field : kFields) {
      const std::vector<double> values = collect(runs, field);
      const bool param = field == &RunOutcome::lambda || field == &RunOutcome::param2;
      out += ',' + (param ? fmt_param(std_of(values))
                          : fmt_metric(std_of(values)));
    }
    out += '\n';
  };

  for (const RunOutcome& r : lfsg_runs) run_row("lfsg", r);
  for (const RunOutcome& r : oracle_runs) run_row("oracle", r);
  if (!lfsg_runs.empty()) aggregate_rows("lfsg", lfsg_runs);
  if (!oracle_runs.empty()) aggregate_rows("oracle", oracle_runs);

  if (!lfsg_runs.empty() && !oracle_runs.empty()) {
    out += "lfsg_bench_v1,both,ranksum,agg,nan";
    for (const auto field : kFields) {
      const std::vector<double> a = collect(lfsg_runs, field);
      const std::vector<double> b = collect(oracle_runs, field);
      const double p = (a.empty() || b.empty()) ? kNan : ranksum(a, b);
      out += ',' + fmt_metric(p);
    }
    out += '\n';
  }
  return out;
}

std::string BenchReport::to_text() const {
  std::string out;
  char line[512];
  std::snprintf(line, sizeof line,
                "benchmark: %s, metric %s, mode %s, runs %d, in-fraction %s\n",
                config.algo.kind.c_str(),
                config.metric == MetricKind::ACC ? "ACC" : "NMI",
                mode_name(config.mode), config.runs,
                fmt("%.3g", config.in_fraction).c_str());
  out += line;
  std::snprintf(line, sizeof line, "data: %dx%d, %d clusters, seed %llu\n",
                data_rows, data_cols, clusters,
                static_cast<unsigned long long>(config.seed));
  out += line;

  const auto mode_block = [&](const char* name,
                              const std::vector<RunOutcome>& runs) {
    if (runs.empty()) return;
    std::size_t ok = 0, nonconv = 0;
    for (const RunOutcome& r : runs) {
      if (r.failed) continue;
      ++ok;
      if (!r.converged) ++nonconv;
    }
    std::snprintf(line, sizeof line,
                  "mode %s: ok %zu/%zu, non-converged %zu\n", name, ok,
                  runs.size(), nonconv);
    out += line;
    const auto stat = [&](const char* label, double RunOutcome::*field,
                          const char* fmtstr) {
      const std::vector<double> v = collect(runs, field);
      std::snprintf(line, sizeof line, "  %-10s %s ± %s\n", label,
                    fmt(fmtstr, mean_of(v)).c_str(),
                    fmt(fmtstr, std_of(v)).c_str());
      out += line;
    };
    stat("lambda", &RunOutcome::lambda, "%.6g");
    if (!config.grid_second.values.empty())
      stat(config.algo.kind == "klsr" ? "sigma2" : "filter_k",
           &RunOutcome::param2, "%.6g");
    stat("ACC in", &RunOutcome::acc_in, "%.2f");
    stat("NMI in", &RunOutcome::nmi_in, "%.2f");
    stat("F1 in", &RunOutcome::f1_in, "%.2f");
    if (config.algo.kind == "gf_lsr") {
      out += "  (no out-of-sample path for gf_lsr)\n";
    } else {
      stat("ACC out", &RunOutcome::acc_out, "%.2f");
      stat("NMI out", &RunOutcome::nmi_out, "%.2f");
      stat("F1 out", &RunOutcome::f1_out, "%.2f");
    }
    for (const RunOutcome& r : runs) {
      if (r.failed) {
        std::snprintf(line, sizeof line, "  run %d FAILED: %s\n", r.run,
                      r.error.c_str());
        out += line;
      }
    }
  };
  mode_block("lfsg", lfsg_runs);
  mode_block("oracle", oracle_runs);

  if (!lfsg_runs.empty() && !oracle_runs.empty()) {
    out += "rank-sum p (lfsg vs oracle):";
    const char* names[] = {"lambda", "param2", "acc_in", "nmi_in",
                           "f1_in",  "acc_out", "nmi_out", "f1_out"};
    for (std::size_t i = 0; i < std::size(kFields); ++i) {
      const std::vector<double> a = collect(lfsg_runs, kFields[i]);
      const std::vector<double> b = collect(oracle_runs, kFields[i]);
      if (a.empty() || b.empty()) continue;
      std::snprintf(line, sizeof line, " %s=%s", names[i],
                    fmt("%.4f", ranksum(a, b)).c_str());
      out += line;
    }
    out += '\n';
  }
  if (config.runs == 1)
    out += "note: single run; std is the degenerate-sample convention (0)\n";
  return out;
}

}  // namespace lfsg
