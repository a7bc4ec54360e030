#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "lfsg/algos.hpp"
#include "lfsg/bench.hpp"
#include "lfsg/config.hpp"
#include "lfsg/data.hpp"
#include "lfsg/errors.hpp"
#include "lfsg/hpo.hpp"
#include "lfsg/interpret.hpp"
#include "lfsg/metrics.hpp"
#include "lfsg/oos.hpp"

namespace fs = std::filesystem;
using namespace lfsg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitWarning = 2;   // search finished but hit the iteration cap
constexpr int kExitRuntime = 3;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << text;
  if (!os) throw IoError("write failed for " + path);
}

// ---- gen -------------------------------------------------------------

struct GenOpts {
  SyntheticSpec spec;
  std::string out_dir;
  std::string format = "bin";
};

int run_gen(const GenOpts& o) {
  const LabeledData data = generate_synthetic(o.spec);
  fs::create_directories(o.out_dir);
  const std::string matrix_path =
      (fs::path(o.out_dir) / ("data." + o.format)).string();
  const std::string labels_path = (fs::path(o.out_dir) / "labels.txt").string();
  save_matrix(matrix_path, data.X);
  save_labels(labels_path, data.labels);
  std::printf("wrote %s (%ldx%ld) and %s (%zu labels, %d clusters)\n",
              matrix_path.c_str(), static_cast<long>(data.X.rows()),
              static_cast<long>(data.X.cols()), labels_path.c_str(),
              data.labels.size(), o.spec.clusters);
  return kExitOk;
}

// ---- cluster ---------------------------------------------------------

struct ClusterOpts {
  std::string data_path;
  int clusters = 0;
  ScAlgorithmSpec algo;
  std::uint64_t seed = 0;
  int restarts = 10;
  std::string out_labels;
  std::string out_affinity;
  std::string out_representation;
};

int run_cluster(const ClusterOpts& o) {
  const Matrix X = load_matrix(o.data_path);
  const ClusterResult result =
      cluster(X, o.clusters, o.algo, o.seed, o.restarts);
  save_labels(o.out_labels, result.labels);
  if (!o.out_affinity.empty()) save_matrix(o.out_affinity, result.affinity);
  if (!o.out_representation.empty())
    save_matrix(o.out_representation, result.representation);
  std::printf("clustered %ld samples into %d clusters (%s, %d iteration%s)\n",
              static_cast<long>(X.cols()), o.clusters, o.algo.kind.c_str(),
              result.iterations, result.iterations == 1 ? "" : "s");
  return kExitOk;
}

// ---- hpo ---------------------------------------------------------------

struct HpoOpts {
  std::string config_path;
  std::string out_dir;
};

ScAlgorithmSpec job_spec(const HpoJob& job, double lambda, double second,
                         bool has_second) {
  ScAlgorithmSpec s = job.algo;
  s.lambda = lambda;
  if (has_second) {
    if (job.algo.kind == "klsr") {
      s.sigma2 = second;
    } else {
      s.filter_order = static_cast<int>(std::llround(second));
    }
  }
  return s;
}

int run_hpo(const HpoOpts& o) {
  const HpoJob job = hpo_job_from_json_file(o.config_path);
  const Matrix X = load_matrix(job.matrix_path);

  Labels truth;
  int clusters = job.clusters;
  if (!job.labels_path.empty()) {
    truth = load_labels(job.labels_path);
    if (truth.size() != static_cast<std::size_t>(X.cols()))
      throw ConfigError("hpo: label count does not match sample count");
    const int from_labels = count_clusters(truth);
    if (clusters > 0 && clusters != from_labels)
      throw ConfigError("hpo: 'clusters' disagrees with the label file");
    clusters = from_labels;
  }

  for (const auto& w : grid_spacing_check(job.grid_lambda,
                                          job.search.spacing_warn_ratio))
    std::cerr << "warning: " << w << "\n";
  if (!job.grid_second.values.empty()) {
    for (const auto& w : grid_spacing_check(job.grid_second,
                                            job.search.spacing_warn_ratio))
      std::cerr << "warning: " << w << "\n";
  }

  fs::create_directories(o.out_dir);
  const bool two_grids = !job.grid_second.values.empty();
  const char* second_name = job.algo.kind == "klsr" ? "sigma2" : "filter_order";
  std::string summary;
  char line[512];
  bool capped = false;

  const auto run_mode = [&](bool oracle_mode) {
    const char* mode = oracle_mode ? "oracle" : "lfsg";
    Labels final_labels;
    if (two_grids) {
      const auto ev2 = [&](double a, double b) {
        return cluster(X, clusters, job_spec(job, a, b, true), job.seed,
                       job.kmeans_restarts)
            .labels;
      };
      const Hpo2dResult res =
          oracle_mode ? oracle_search_2d(ev2, job.grid_lambda, job.grid_second,
                                         truth, job.search, job.threads)
                      : lfsg_search_2d(ev2, job.grid_lambda, job.grid_second,
                                       job.search, job.threads);
      write_trace_csv((fs::path(o.out_dir) /
                       (std::string("trace_") + mode + "_lambda.csv"))
                          .string(),
                      res.stage_a.trace);
      write_trace_csv((fs::path(o.out_dir) /
                       (std::string("trace_") + mode + "_" + second_name + ".csv"))
                          .string(),
                      res.stage_b.trace);
      const double second_used =
          job.algo.kind == "gf_lsr"
              ? static_cast<double>(std::llround(res.b_opt))
              : res.b_opt;
      std::snprintf(line, sizeof line,
                    "%s lambda_opt %.10g\n%s %s_opt %.10g\n%s converged %d\n"
                    "%s evaluations %d\n",
                    mode, res.a_opt, mode, second_name, second_used, mode,
                    res.stage_a.converged && res.stage_b.converged ? 1 : 0,
                    mode,
                    res.stage_a.evaluations + res.stage_b.evaluations);
      summary += line;
      capped |= !res.stage_a.converged || !res.stage_b.converged;
      final_labels = res.stage_b.final_labels;
    } else {
      Evaluator ev(
          [&](double l) {
            return cluster(X, clusters, job_spec(job, l, 0.0, false), job.seed,
                           job.kmeans_restarts)
                .labels;
          },
          job.threads);
      const HpoResult res =
          oracle_mode ? oracle_grid_search(ev, job.grid_lambda, truth, job.search)
                      : lfsg_search_1d(ev, job.grid_lambda, job.search);
      write_trace_csv(
          (fs::path(o.out_dir) / (std::string("trace_") + mode + ".csv"))
              .string(),
          res.trace);
      std::snprintf(line, sizeof line,
                    "%s lambda_opt %.10g\n%s grid_argmax %.10g\n"
                    "%s converged %d\n%s evaluations %d\n",
                    mode, res.optimum, mode, res.grid_argmax, mode,
                    res.converged ? 1 : 0, mode, res.evaluations);
      summary += line;
      capped |= !res.converged;
      final_labels = res.final_labels;
    }
    save_labels(
        (fs::path(o.out_dir) / (std::string("labels_") + mode + ".txt"))
            .string(),
        final_labels);
    if (!truth.empty()) {
      std::snprintf(line, sizeof line, "%s ACC %.2f NMI %.2f F1 %.2f\n", mode,
                    acc(final_labels, truth), nmi(final_labels, truth),
                    pairwise_f1(final_labels, truth));
      summary += line;
    }
    return final_labels;
  };

  Labels lfsg_labels, oracle_labels;
  if (job.mode != BenchMode::Oracle) lfsg_labels = run_mode(false);
  if (job.mode != BenchMode::Lfsg) oracle_labels = run_mode(true);
  if (job.mode == BenchMode::Both && !truth.empty()) {
    std::snprintf(line, sizeof line,
                  "gap (lfsg - oracle) ACC %.2f NMI %.2f F1 %.2f\n",
                  acc(lfsg_labels, truth) - acc(oracle_labels, truth),
                  nmi(lfsg_labels, truth) - nmi(oracle_labels, truth),
                  pairwise_f1(lfsg_labels, truth) -
                      pairwise_f1(oracle_labels, truth));
    summary += line;
  }

  write_text((fs::path(o.out_dir) / "summary.txt").string(), summary);
  std::fputs(summary.c_str(), stdout);
  return capped ? kExitWarning : kExitOk;
}

// ---- bench -------------------------------------------------------------

struct BenchOpts {
  std::string config_path;
  std::string out_dir;
};

int run_bench_cmd(const BenchOpts& o) {
  const BenchConfig config = bench_config_from_json_file(o.config_path);
  for (const auto& w : grid_spacing_check(config.grid_lambda,
                                          config.search.spacing_warn_ratio))
    std::cerr << "warning: " << w << "\n";
  const BenchReport report = run_bench(config);
  fs::create_directories(o.out_dir);
  write_text((fs::path(o.out_dir) / "report.csv").string(), report.to_csv());
  const std::string text = report.to_text();
  write_text((fs::path(o.out_dir) / "report.txt").string(), text);
  std::fputs(text.c_str(), stdout);
  return kExitOk;
}

// ---- eval ----------------------------------------------------------------

struct EvalOpts {
  std::string pred_path;
  std::string truth_path;
};

int run_eval(const EvalOpts& o) {
  const Labels pred = load_labels(o.pred_path);
  const Labels truth = load_labels(o.truth_path);
  std::printf("ACC %.2f NMI %.2f F1 %.2f\n", acc(pred, truth),
              nmi(pred, truth), pairwise_f1(pred, truth));
  return kExitOk;
}

// ---- oos -----------------------------------------------------------------

struct OosOpts {
  std::string train_path;
  std::string train_labels_path;
  std::string test_path;
  int dim = 9;
  bool kernel = false;
  double sigma2 = 1.0;
  std::string out_labels;
  std::string truth_path;
  std::string distances_path;
};

int run_oos(const OosOpts& o) {
  const Matrix X_train = load_matrix(o.train_path);
  const Labels y_train = load_labels(o.train_labels_path);
  if (y_train.size() != static_cast<std::size_t>(X_train.cols()))
    throw ConfigError("oos: train label count does not match sample count");
  const Matrix X_test = load_matrix(o.test_path);

  Labels pred;
  Matrix distances;
  if (o.kernel) {
    const KernelOosModel model =
        fit_kernel_oos(X_train, y_train, o.dim, o.sigma2);
    pred.resize(static_cast<std::size_t>(X_test.cols()));
    distances.resize(static_cast<Eigen::Index>(model.coord_model.means.size()),
                     X_test.cols());
    for (Eigen::Index j = 0; j < X_test.cols(); ++j) {
      const OosAssignment a = assign_kernel_oos(model, X_test.col(j));
      pred[static_cast<std::size_t>(j)] = a.label;
      for (std::size_t c = 0; c < a.distances.size(); ++c)
        distances(static_cast<Eigen::Index>(c), j) = a.distances[c];
    }
  } else {
    const SubspaceModel model = fit_subspace_model(X_train, y_train, o.dim);
    pred.resize(static_cast<std::size_t>(X_test.cols()));
    distances.resize(static_cast<Eigen::Index>(model.means.size()),
                     X_test.cols());
    for (Eigen::Index j = 0; j < X_test.cols(); ++j) {
      const OosAssignment a = assign_oos(model, X_test.col(j));
      pred[static_cast<std::size_t>(j)] = a.label;
      for (std::size_t c = 0; c < a.distances.size(); ++c)
        distances(static_cast<Eigen::Index>(c), j) = a.distances[c];
    }
  }
  save_labels(o.out_labels, pred);
  if (!o.distances_path.empty()) save_matrix(o.distances_path, distances);
  std::printf("assigned %ld held-out samples (%s subspace model, d=%d)\n",
              static_cast<long>(X_test.cols()), o.kernel ? "kernel" : "linear",
              o.dim);
  if (!o.truth_path.empty()) {
    const Labels truth = load_labels(o.truth_path);
    std::printf("ACC %.2f NMI %.2f F1 %.2f\n", acc(pred, truth),
                nmi(pred, truth), pairwise_f1(pred, truth));
  }
  return kExitOk;
}

// ---- viz -------------------------------------------------------------------

struct VizOpts {
  std::string data_path;
  std::string labels_path;
  int dim = 9;
  int rows = 0;
  int cols = 0;
  std::string format = "pgm";
  std::string out_dir;
};

int run_viz(const VizOpts& o) {
  const Matrix X = load_matrix(o.data_path);
  const Labels labels = load_labels(o.labels_path);
  if (labels.size() != static_cast<std::size_t>(X.cols()))
    throw ConfigError("viz: label count does not match sample count");

  const std::vector<Vector> reps = cluster_representatives(X, labels, o.dim);
  std::vector<Matrix> images;
  images.reserve(reps.size());
  for (const Vector& a : reps) images.push_back(matricize(a, o.rows, o.cols));
  const auto paths = export_images(
      images, o.out_dir,
      o.format == "png" ? ImageFormat::PNG : ImageFormat::PGM);
  for (const auto& p : paths) std::printf("%s\n", p.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"subspace clustering with label-free hyperparameter search"};
  app.require_subcommand(1);

  GenOpts gen;
  CLI::App* cmd_gen = app.add_subcommand(
      "gen", "generate a synthetic union-of-subspaces dataset");
  cmd_gen->add_option("--clusters", gen.spec.clusters, "number of subspaces")
      ->required();
  cmd_gen->add_option("--ambient", gen.spec.ambient_dim, "ambient dimension D")
      ->required();
  cmd_gen->add_option("--dim", gen.spec.subspace_dim, "subspace dimension d")
      ->required();
  cmd_gen
      ->add_option("--per-cluster", gen.spec.points_per_cluster,
                   "points per subspace")
      ->required();
  cmd_gen->add_option("--noise", gen.spec.noise_sigma,
                      "additive Gaussian noise sigma (default 0)");
  cmd_gen->add_option("--seed", gen.spec.seed, "RNG seed (default 0)");
  cmd_gen->add_option("-o,--out", gen.out_dir, "output directory")->required();
  cmd_gen->add_option("--format", gen.format, "matrix format: bin|csv")
      ->check(CLI::IsMember({"bin", "csv"}));

  ClusterOpts clu;
  CLI::App* cmd_cluster =
      app.add_subcommand("cluster", "cluster a dataset at fixed hyperparameters");
  cmd_cluster->add_option("--data", clu.data_path, "matrix file (.csv or .bin)")
      ->required();
  cmd_cluster->add_option("--clusters", clu.clusters, "number of clusters")
      ->required();
  cmd_cluster->add_option("--kind", clu.algo.kind,
                          "algorithm: lsr|klsr|gf_lsr (default lsr)");
  cmd_cluster->add_option("--lambda", clu.algo.lambda,
                          "regularization (default 1.0)");
  cmd_cluster->add_option("--sigma2", clu.algo.sigma2,
                          "kernel bandwidth^2 for klsr (default 1.0)");
  cmd_cluster->add_option("--filter-order", clu.algo.filter_order,
                          "graph filter order for gf_lsr (default 1)");
  cmd_cluster->add_option("--gf-epsilon", clu.algo.gf_epsilon,
                          "gf_lsr affinity stop threshold (default 1e-4)");
  cmd_cluster->add_option("--gf-max-iter", clu.algo.gf_max_iter,
                          "gf_lsr iteration cap (default 50)");
  cmd_cluster->add_option("--seed", clu.seed, "RNG seed (default 0)");
  cmd_cluster->add_option("--restarts", clu.restarts,
                          "k-means restarts (default 10)");
  cmd_cluster->add_option("-o,--out", clu.out_labels, "output labels file")
      ->required();
  cmd_cluster->add_option("--affinity", clu.out_affinity,
                          "also write the affinity matrix here");
  cmd_cluster->add_option("--representation", clu.out_representation,
                          "also write the representation matrix here");

  HpoOpts hpo;
  CLI::App* cmd_hpo = app.add_subcommand(
      "hpo", "hyperparameter search (JSON config; see config-schema)");
  cmd_hpo->add_option("--config", hpo.config_path, "JSON config file")
      ->required();
  cmd_hpo->add_option("-o,--out", hpo.out_dir, "output directory")->required();

  BenchOpts bench;
  CLI::App* cmd_bench = app.add_subcommand(
      "bench", "repeated-split benchmark (JSON config; see config-schema)");
  cmd_bench->add_option("--config", bench.config_path, "JSON config file")
      ->required();
  cmd_bench->add_option("-o,--out", bench.out_dir, "output directory")
      ->required();

  EvalOpts eval;
  CLI::App* cmd_eval =
      app.add_subcommand("eval", "score one label file against another");
  cmd_eval->add_option("--pred", eval.pred_path, "predicted labels file")
      ->required();
  cmd_eval->add_option("--truth", eval.truth_path, "reference labels file")
      ->required();

  OosOpts oos;
  CLI::App* cmd_oos = app.add_subcommand(
      "oos", "assign held-out samples to fitted subspaces");
  cmd_oos->add_option("--train", oos.train_path, "training matrix")->required();
  cmd_oos->add_option("--train-labels", oos.train_labels_path,
                      "training labels file")
      ->required();
  cmd_oos->add_option("--test", oos.test_path, "held-out matrix")->required();
  cmd_oos->add_option("--dim", oos.dim, "subspace dimension d (default 9)");
  cmd_oos->add_flag("--kernel", oos.kernel, "use the kernel-space model");
  cmd_oos->add_option("--sigma2", oos.sigma2,
                      "kernel bandwidth^2 (default 1.0)");
  cmd_oos->add_option("-o,--out", oos.out_labels, "output labels file")
      ->required();
  cmd_oos->add_option("--truth", oos.truth_path,
                      "held-out truth labels; prints metrics when given");
  cmd_oos->add_option("--distances", oos.distances_path,
                      "also write the per-cluster distance matrix here");

  VizOpts viz;
  CLI::App* cmd_viz = app.add_subcommand(
      "viz", "export per-cluster representative images");
  cmd_viz->add_option("--data", viz.data_path, "matrix file")->required();
  cmd_viz->add_option("--labels", viz.labels_path, "labels file")->required();
  cmd_viz->add_option("--dim", viz.dim,
                      "singular vectors per cluster (default 9)");
  cmd_viz->add_option("--rows", viz.rows, "image rows Dx")->required();
  cmd_viz->add_option("--cols", viz.cols, "image cols Dy")->required();
  cmd_viz->add_option("--format", viz.format, "pgm|png (default pgm)")
      ->check(CLI::IsMember({"pgm", "png"}));
  cmd_viz->add_option("-o,--out", viz.out_dir, "output directory")->required();

  CLI::App* cmd_schema = app.add_subcommand(
      "config-schema", "print the JSON config schema for hpo and bench");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message
    return kExitUsage;
  }

  try {
    if (cmd_gen->parsed()) return run_gen(gen);
    if (cmd_cluster->parsed()) return run_cluster(clu);
    if (cmd_hpo->parsed()) return run_hpo(hpo);
    if (cmd_bench->parsed()) return run_bench_cmd(bench);
    if (cmd_eval->parsed()) return run_eval(eval);
    if (cmd_oos->parsed()) return run_oos(oos);
    if (cmd_viz->parsed()) return run_viz(viz);
    if (cmd_schema->parsed()) {
      std::fputs(config_schema_text().c_str(), stdout);
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidSpec& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NotImplemented& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
