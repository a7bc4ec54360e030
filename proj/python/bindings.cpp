#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lfsg/algos.hpp"
#include "lfsg/bench.hpp"
#include "lfsg/config.hpp"
#include "lfsg/data.hpp"
#include "lfsg/errors.hpp"
#include "lfsg/graph.hpp"
#include "lfsg/hpo.hpp"
#include "lfsg/interpret.hpp"
#include "lfsg/metrics.hpp"
#include "lfsg/oos.hpp"

namespace py = pybind11;

namespace {

lfsg::MetricKind metric_from_name(const std::string& name) {
  if (name == "acc") return lfsg::MetricKind::ACC;
  if (name == "nmi") return lfsg::MetricKind::NMI;
  throw lfsg::InvalidSpec("metric must be 'acc' or 'nmi', got '" + name + "'");
}

lfsg::SplitMode split_from_name(const std::string& name) {
  if (name == "thirds") return lfsg::SplitMode::Thirds;
  if (name == "halves") return lfsg::SplitMode::Halves;
  throw lfsg::InvalidSpec("split must be 'thirds' or 'halves', got '" + name +
                          "'");
}

lfsg::LfsgConfig search_config(const std::string& metric, double epsilon,
                               const std::string& split, int max_iterations) {
  lfsg::LfsgConfig c;
  c.metric = metric_from_name(metric);
  c.epsilon = epsilon;
  c.split_mode = split_from_name(split);
  c.max_iterations = max_iterations;
  return c;
}

lfsg::ScAlgorithmSpec algo_spec(const std::string& kind, double lam,
                                double sigma2, int filter_order,
                                double gf_epsilon, int gf_max_iter) {
  lfsg::ScAlgorithmSpec s;
  s.kind = kind;
  s.lambda = lam;
  s.sigma2 = sigma2;
  s.filter_order = filter_order;
  s.gf_epsilon = gf_epsilon;
  s.gf_max_iter = gf_max_iter;
  return s;
}

lfsg::ImageFormat format_from_name(const std::string& name) {
  if (name == "pgm") return lfsg::ImageFormat::PGM;
  if (name == "png") return lfsg::ImageFormat::PNG;
  throw lfsg::InvalidSpec("format must be 'pgm' or 'png', got '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Subspace clustering core: ridge self-expression graphs, spectral "
            "clustering, label-free hyperparameter search, out-of-sample "
            "assignment.";
  m.attr("__version__") = "0.1.0";

  // ---- data ----------------------------------------------------------------

  m.def(
      "generate_synthetic",
      [](int ambient_dim, int subspace_dim, int clusters,
         int points_per_cluster, double noise_sigma, std::uint64_t seed) {
        lfsg::SyntheticSpec spec;
        spec.ambient_dim = ambient_dim;
        spec.subspace_dim = subspace_dim;
        spec.clusters = clusters;
        spec.points_per_cluster = points_per_cluster;
        spec.noise_sigma = noise_sigma;
        spec.seed = seed;
        const lfsg::LabeledData data = lfsg::generate_synthetic(spec);
        return std::make_pair(data.X, data.labels);
      },
      py::arg("ambient_dim"), py::arg("subspace_dim"), py::arg("clusters"),
      py::arg("points_per_cluster"), py::arg("noise_sigma") = 0.0,
      py::arg("seed") = 0,
      "Union-of-subspaces sample: returns (X, labels) with samples as "
      "columns of X and 0-based labels.");

  m.def(
      "split_in_out",
      [](const lfsg::Matrix& X, const lfsg::Labels& labels, double in_fraction,
         std::uint64_t seed) {
        const lfsg::Split s = lfsg::split_in_out({X, labels}, in_fraction, seed);
        return py::make_tuple(s.in.X, s.in.labels, s.out.X, s.out.labels,
                              s.in_indices, s.out_indices);
      },
      py::arg("X"), py::arg("labels"), py::arg("in_fraction"), py::arg("seed"),
      "Per-class shuffle and split; returns (X_in, y_in, X_out, y_out, "
      "in_indices, out_indices).");

  m.def("load_matrix", &lfsg::load_matrix, py::arg("path"),
        "Load a matrix, '.bin' as the binary format, anything else as CSV.");
  m.def("save_matrix", &lfsg::save_matrix, py::arg("path"), py::arg("X"));
  m.def("load_labels", &lfsg::load_labels, py::arg("path"),
        "1-based labels on disk become 0-based in memory.");
  m.def("save_labels", &lfsg::save_labels, py::arg("path"), py::arg("labels"));
  m.def("count_clusters", &lfsg::count_clusters, py::arg("labels"),
        "Number of distinct labels; validates they form {0, ..., C-1}.");

  // ---- representations and graphs -------------------------------------------

  m.def(
      "lsr",
      [](const lfsg::Matrix& X, double lam) {
        py::gil_scoped_release release;
        return lfsg::lsr(X, lam);
      },
      py::arg("X"), py::arg("lam"),
      "Ridge self-expression Z = (X^T X + lam I)^{-1} X^T X.");
  m.def(
      "gaussian_gram",
      [](const lfsg::Matrix& X, double sigma2) {
        py::gil_scoped_release release;
        return lfsg::gaussian_gram(X, sigma2);
      },
      py::arg("X"), py::arg("sigma2"),
      "K_ij = exp(-||x_i - x_j||^2 / (2 sigma2)), samples as columns.");
  m.def(
      "gaussian_cross_gram",
      [](const lfsg::Matrix& A, const lfsg::Matrix& B, double sigma2) {
        py::gil_scoped_release release;
        return lfsg::gaussian_cross_gram(A, B, sigma2);
      },
      py::arg("A"), py::arg("B"), py::arg("sigma2"));
  m.def(
      "kernel_lsr",
      [](const lfsg::Matrix& K, double lam) {
        py::gil_scoped_release release;
        return lfsg::kernel_lsr(K, lam);
      },
      py::arg("K"), py::arg("lam"),
      "Kernelized form Z = (K + lam I)^{-1} K.");

  m.def("affinity_from_representation", &lfsg::affinity_from_representation,
        py::arg("Z"), "W = (|Z| + |Z^T|) / 2.");
  m.def(
      "normalized_laplacian",
      [](const lfsg::Matrix& W) { return lfsg::build_graph(W).L; },
      py::arg("W"), "L = I - D^{-1/2} W D^{-1/2}.");
  m.def("graph_filter", &lfsg::graph_filter, py::arg("X"), py::arg("L"),
        py::arg("k"), "Columns filtered by (I - L/2)^k.");
  m.def(
      "spectral_embed",
      [](const lfsg::Matrix& L, int clusters) {
        const lfsg::SpectralEmbedding e = lfsg::spectral_embed(L, clusters);
        return std::make_pair(e.coords, e.eigenvalues);
      },
      py::arg("L"), py::arg("clusters"),
      "Row-normalized eigenvectors of the C smallest eigenvalues; returns "
      "(coords, eigenvalues).");
  m.def(
      "spectral_cluster",
      [](const lfsg::Matrix& L, int clusters, std::uint64_t seed,
         int restarts) {
        py::gil_scoped_release release;
        return lfsg::spectral_cluster(L, clusters, seed, restarts);
      },
      py::arg("L"), py::arg("clusters"), py::arg("seed") = 0,
      py::arg("restarts") = 10);

  // ---- clustering pipeline ---------------------------------------------------

  py::class_<lfsg::ClusterResult>(m, "ClusterResult")
      .def_readonly("labels", &lfsg::ClusterResult::labels)
      .def_readonly("affinity", &lfsg::ClusterResult::affinity)
      .def_readonly("representation", &lfsg::ClusterResult::representation)
      .def_readonly("iterations", &lfsg::ClusterResult::iterations)
      .def("__repr__", [](const lfsg::ClusterResult& r) {
        return "ClusterResult(n=" + std::to_string(r.labels.size()) +
               ", iterations=" + std::to_string(r.iterations) + ")";
      });

  m.def(
      "cluster",
      [](const lfsg::Matrix& X, int clusters, const std::string& kind,
         double lam, double sigma2, int filter_order, double gf_epsilon,
         int gf_max_iter, std::uint64_t seed, int kmeans_restarts) {
        const lfsg::ScAlgorithmSpec spec =
            algo_spec(kind, lam, sigma2, filter_order, gf_epsilon, gf_max_iter);
        py::gil_scoped_release release;
        return lfsg::cluster(X, clusters, spec, seed, kmeans_restarts);
      },
      py::arg("X"), py::arg("clusters"), py::arg("kind") = "lsr",
      py::arg("lam") = 1.0, py::arg("sigma2") = 1.0,
      py::arg("filter_order") = 1, py::arg("gf_epsilon") = 1e-4,
      py::arg("gf_max_iter") = 50, py::arg("seed") = 0,
      py::arg("kmeans_restarts") = 10,
      "Representation -> affinity -> spectral embedding -> k-means. kind is "
      "'lsr', 'klsr', or 'gf_lsr'.");

  // ---- metrics ---------------------------------------------------------------

  m.def("acc", &lfsg::acc, py::arg("y1"), py::arg("y2"),
        "Clustering accuracy in percent (optimal label matching).");
  m.def("nmi", &lfsg::nmi, py::arg("y1"), py::arg("y2"),
        "Normalized mutual information in percent, MI / sqrt(H1*H2).");
  m.def("pairwise_f1", &lfsg::pairwise_f1, py::arg("y1"), py::arg("y2"),
        "Pairwise F1 in percent over co-clustered sample pairs.");
  m.def("ranksum", &lfsg::ranksum, py::arg("a"), py::arg("b"),
        "Two-sided Wilcoxon rank-sum p-value; exact for small untied "
        "samples, normal approximation otherwise.");
  m.def("hungarian", &lfsg::hungarian, py::arg("cost"),
        "Minimum-cost assignment on a square matrix; per-row column index.");

  // ---- hyperparameter search -------------------------------------------------

  py::class_<lfsg::TraceRecord>(m, "TraceRecord")
      .def_readonly("iteration", &lfsg::TraceRecord::iteration)
      .def_readonly("l1", &lfsg::TraceRecord::l1)
      .def_readonly("l2", &lfsg::TraceRecord::l2)
      .def_readonly("l3", &lfsg::TraceRecord::l3)
      .def_readonly("l4", &lfsg::TraceRecord::l4)
      .def_readonly("h12", &lfsg::TraceRecord::h12)
      .def_readonly("h23", &lfsg::TraceRecord::h23)
      .def_readonly("h34", &lfsg::TraceRecord::h34)
      .def("__repr__", [](const lfsg::TraceRecord& r) {
        return "TraceRecord(iteration=" + std::to_string(r.iteration) + ")";
      });

  py::class_<lfsg::HpoResult>(m, "HpoResult")
      .def_readonly("optimum", &lfsg::HpoResult::optimum)
      .def_readonly("final_labels", &lfsg::HpoResult::final_labels)
      .def_readonly("trace", &lfsg::HpoResult::trace)
      .def_readonly("evaluations", &lfsg::HpoResult::evaluations)
      .def_readonly("converged", &lfsg::HpoResult::converged)
      .def_readonly("grid_scores", &lfsg::HpoResult::grid_scores)
      .def_readonly("grid_argmax", &lfsg::HpoResult::grid_argmax)
      .def("__repr__", [](const lfsg::HpoResult& r) {
        return "HpoResult(optimum=" + std::to_string(r.optimum) +
               ", evaluations=" + std::to_string(r.evaluations) +
               ", converged=" + (r.converged ? std::string("True")
                                             : std::string("False")) +
               ")";
      });

  py::class_<lfsg::Hpo2dResult>(m, "Hpo2dResult")
      .def_readonly("a_opt", &lfsg::Hpo2dResult::a_opt)
      .def_readonly("b_opt", &lfsg::Hpo2dResult::b_opt)
      .def_readonly("stage_a", &lfsg::Hpo2dResult::stage_a)
      .def_readonly("stage_b", &lfsg::Hpo2dResult::stage_b)
      .def("__repr__", [](const lfsg::Hpo2dResult& r) {
        return "Hpo2dResult(a_opt=" + std::to_string(r.a_opt) +
               ", b_opt=" + std::to_string(r.b_opt) + ")";
      });

  m.def(
      "search",
      [](const std::function<lfsg::Labels(double)>& evaluate,
         std::vector<double> grid, const std::string& metric, double epsilon,
         const std::string& split, int max_iterations) {
        // python callables run on this thread with the GIL held
        lfsg::Evaluator ev(evaluate);
        return lfsg::lfsg_search_1d(
            ev, lfsg::HyperGrid{std::move(grid)},
            search_config(metric, epsilon, split, max_iterations));
      },
      py::arg("evaluate"), py::arg("grid"), py::arg("metric") = "acc",
      py::arg("epsilon") = 0.001, py::arg("split") = "thirds",
      py::arg("max_iterations") = 60,
      "Label-free search over a callable mapping a hyperparameter value to "
      "pseudo-labels: grid scan of neighbor agreement, then interval "
      "refinement.");

  m.def(
      "oracle_search",
      [](const std::function<lfsg::Labels(double)>& evaluate,
         std::vector<double> grid, const lfsg::Labels& truth,
         const std::string& metric, double epsilon, const std::string& split,
         int max_iterations) {
        lfsg::Evaluator ev(evaluate);
        return lfsg::oracle_grid_search(
            ev, lfsg::HyperGrid{std::move(grid)}, truth,
            search_config(metric, epsilon, split, max_iterations));
      },
      py::arg("evaluate"), py::arg("grid"), py::arg("truth"),
      py::arg("metric") = "acc", py::arg("epsilon") = 0.001,
      py::arg("split") = "thirds", py::arg("max_iterations") = 60,
      "Ground-truth-driven baseline search over the same grid and "
      "refinement scheme.");

  m.def(
      "search_dataset",
      [](const lfsg::Matrix& X, int clusters, std::vector<double> grid,
         std::optional<std::vector<double>> second_grid,
         const std::string& kind, double sigma2, int filter_order,
         double gf_epsilon, int gf_max_iter, bool oracle,
         std::optional<lfsg::Labels> truth, const std::string& metric,
         double epsilon, const std::string& split, int max_iterations,
         std::uint64_t seed, int threads, int kmeans_restarts) -> py::object {
        if (oracle && !truth)
          throw lfsg::InvalidSpec("oracle search needs truth labels");
        const lfsg::LfsgConfig config =
            search_config(metric, epsilon, split, max_iterations);
        const lfsg::ScAlgorithmSpec base =
            algo_spec(kind, 1.0, sigma2, filter_order, gf_epsilon, gf_max_iter);
        const bool has_second = second_grid.has_value();
        if (has_second && kind == "lsr")
          throw lfsg::InvalidSpec(
              "lsr has a single hyperparameter; drop second_grid");
        const auto spec_with = [&base, has_second](double lam, double second) {
          lfsg::ScAlgorithmSpec s = base;
          s.lambda = lam;
          if (has_second) {
            if (s.kind == "klsr") {
              s.sigma2 = second;
            } else {
              s.filter_order = static_cast<int>(std::llround(second));
            }
          }
          return s;
        };

        std::optional<lfsg::HpoResult> res1;
        std::optional<lfsg::Hpo2dResult> res2;
        {
          py::gil_scoped_release release;
          if (!has_second) {
            lfsg::Evaluator ev(
                [&](double l) {
                  return lfsg::cluster(X, clusters, spec_with(l, 0.0), seed,
                                       kmeans_restarts)
                      .labels;
                },
                threads);
            const lfsg::HyperGrid g{std::move(grid)};
            res1 = oracle ? lfsg::oracle_grid_search(ev, g, *truth, config)
                          : lfsg::lfsg_search_1d(ev, g, config);
          } else {
            const auto ev2 = [&](double a, double b) {
              return lfsg::cluster(X, clusters, spec_with(a, b), seed,
                                   kmeans_restarts)
                  .labels;
            };
            const lfsg::HyperGrid ga{std::move(grid)};
            const lfsg::HyperGrid gb{std::move(*second_grid)};
            res2 = oracle ? lfsg::oracle_search_2d(ev2, ga, gb, *truth, config,
                                                   threads)
                          : lfsg::lfsg_search_2d(ev2, ga, gb, config, threads);
          }
        }
        if (res1) return py::cast(*res1);
        return py::cast(*res2);
      },
      py::arg("X"), py::arg("clusters"), py::arg("grid"),
      py::arg("second_grid") = py::none(), py::arg("kind") = "lsr",
      py::arg("sigma2") = 1.0, py::arg("filter_order") = 1,
      py::arg("gf_epsilon") = 1e-4, py::arg("gf_max_iter") = 50,
      py::arg("oracle") = false, py::arg("truth") = py::none(),
      py::arg("metric") = "acc", py::arg("epsilon") = 0.001,
      py::arg("split") = "thirds", py::arg("max_iterations") = 60,
      py::arg("seed") = 0, py::arg("threads") = 1,
      py::arg("kmeans_restarts") = 10,
      "Hyperparameter search over repeated clustering of one dataset. With "
      "second_grid set, runs the two-stage coordinate scheme (sigma2 for "
      "klsr, filter order for gf_lsr) and returns an Hpo2dResult.");

  m.def(
      "grid_spacing_check",
      [](std::vector<double> grid, double warn_ratio) {
        return lfsg::grid_spacing_check(lfsg::HyperGrid{std::move(grid)},
                                        warn_ratio);
      },
      py::arg("grid"), py::arg("warn_ratio") = 2.0,
      "Advisory warnings for adjacent grid values closer than warn_ratio.");
  m.def("trace_to_csv", &lfsg::trace_to_csv, py::arg("trace"));

  // ---- out-of-sample assignment ----------------------------------------------

  py::class_<lfsg::SubspaceModel>(m, "SubspaceModel")
      .def_readonly("means", &lfsg::SubspaceModel::means)
      .def_readonly("bases", &lfsg::SubspaceModel::bases)
      .def("__repr__", [](const lfsg::SubspaceModel& s) {
        return "SubspaceModel(clusters=" + std::to_string(s.means.size()) +
               ")";
      });

  m.def("fit_subspace_model", &lfsg::fit_subspace_model, py::arg("X"),
        py::arg("labels"), py::arg("d"),
        "Per-cluster mean and orthonormal basis of the centered block.");
  m.def(
      "assign_oos",
      [](const lfsg::SubspaceModel& model, const lfsg::Matrix& X) {
        py::gil_scoped_release release;
        return lfsg::assign_oos_batch(model, X);
      },
      py::arg("model"), py::arg("X"),
      "Nearest-subspace label per column of X.");
  m.def(
      "oos_distances",
      [](const lfsg::SubspaceModel& model, const lfsg::Vector& x) {
        const lfsg::OosAssignment a = lfsg::assign_oos(model, x);
        return std::make_pair(a.label, a.distances);
      },
      py::arg("model"), py::arg("x"),
      "Returns (label, per-cluster projection residuals) for one point.");

  py::class_<lfsg::KernelOosModel>(m, "KernelOosModel")
      .def_readonly("sigma2", &lfsg::KernelOosModel::sigma2)
      .def_readonly("eigvals", &lfsg::KernelOosModel::eigvals)
      .def_readonly("coords", &lfsg::KernelOosModel::coords)
      .def("__repr__", [](const lfsg::KernelOosModel& k) {
        return "KernelOosModel(rank=" + std::to_string(k.eigvals.size()) +
               ")";
      });

  m.def("fit_kernel_oos", &lfsg::fit_kernel_oos, py::arg("X"),
        py::arg("labels"), py::arg("d"), py::arg("sigma2"),
        py::arg("rank_tol") = 1e-12,
        "Kernel-space analogue: centered Gram eigenspace plus a subspace "
        "model on the embedded coordinates.");
  m.def("kernel_embed", &lfsg::kernel_embed_test, py::arg("model"),
        py::arg("x"), "Embed one test point into the training eigenspace.");
  m.def(
      "assign_kernel_oos",
      [](const lfsg::KernelOosModel& model, const lfsg::Matrix& X) {
        py::gil_scoped_release release;
        return lfsg::assign_kernel_oos_batch(model, X);
      },
      py::arg("model"), py::arg("X"));

  // ---- interpretability ------------------------------------------------------

  m.def("cluster_representatives", &lfsg::cluster_representatives, py::arg("X"),
        py::arg("labels"), py::arg("d"),
        "Per-cluster singular-value-weighted sum of leading left singular "
        "vectors of the raw cluster block.");
  m.def("matricize", &lfsg::matricize, py::arg("a"), py::arg("dx"),
        py::arg("dy"), "Column-major reshape into a dx x dy image.");
  m.def(
      "export_images",
      [](const std::vector<lfsg::Matrix>& images, const std::string& dir,
         const std::string& format) {
        return lfsg::export_images(images, dir, format_from_name(format));
      },
      py::arg("images"), py::arg("dir"), py::arg("format") = "pgm",
      "Min-max normalize to [0,255] and write cluster_<c>.<ext> files; "
      "returns the written paths.");

  // ---- benchmark -------------------------------------------------------------

  m.def(
      "bench_csv",
      [](const std::string& config_path) {
        const lfsg::BenchConfig cfg =
            lfsg::bench_config_from_json_file(config_path);
        py::gil_scoped_release release;
        return lfsg::run_bench(cfg).to_csv();
      },
      py::arg("config_path"),
      "Run the repeated-split benchmark described by a JSON config; returns "
      "the CSV report.");
  m.def("config_schema", &lfsg::config_schema_text,
        "Documentation of the JSON config formats.");
}
