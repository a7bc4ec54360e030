#include "lfsg/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lfsg/errors.hpp"

namespace lfsg {
namespace {

using nlohmann::json;

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

std::string slurp(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key))
      throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

MetricKind parse_metric(const std::string& s) {
  if (s == "acc" || s == "ACC") return MetricKind::ACC;
  if (s == "nmi" || s == "NMI") return MetricKind::NMI;
  throw ConfigError("metric must be 'acc' or 'nmi', got '" + s + "'");
}

BenchMode parse_mode(const std::string& s) {
  if (s == "lfsg") return BenchMode::Lfsg;
  if (s == "oracle") return BenchMode::Oracle;
  if (s == "both") return BenchMode::Both;
  throw ConfigError("mode must be 'lfsg', 'oracle' or 'both', got '" + s + "'");
}

SplitMode parse_split_mode(const std::string& s) {
  if (s == "thirds") return SplitMode::Thirds;
  if (s == "halves") return SplitMode::Halves;
  throw ConfigError("split_mode must be 'thirds' or 'halves', got '" + s + "'");
}

HyperGrid parse_grid(const json& values, const char* name) {
  HyperGrid grid;
  if (!values.is_array())
    throw ConfigError(std::string("grid '") + name + "' must be an array");
  for (const auto& v : values) {
    if (!v.is_number())
      throw ConfigError(std::string("grid '") + name + "' must hold numbers");
    grid.values.push_back(v.get<double>());
  }
  try {
    validate_grid(grid);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("grid '") + name + "': " + e.what());
  }
  return grid;
}

ScAlgorithmSpec parse_algo(const json& j) {
  reject_unknown_keys(
      j, {"kind", "lambda", "sigma2", "filter_order", "gf_epsilon", "gf_max_iter"},
      "algorithm");
  ScAlgorithmSpec algo;
  algo.kind = get_or<std::string>(j, "kind", "lsr");
  algo.lambda = get_or<double>(j, "lambda", algo.lambda);
  algo.sigma2 = get_or<double>(j, "sigma2", algo.sigma2);
  algo.filter_order = get_or<int>(j, "filter_order", algo.filter_order);
  algo.gf_epsilon = get_or<double>(j, "gf_epsilon", algo.gf_epsilon);
  algo.gf_max_iter = get_or<int>(j, "gf_max_iter", algo.gf_max_iter);
  return algo;
}

LfsgConfig parse_search(const json& j) {
  reject_unknown_keys(
      j, {"epsilon", "split_mode", "max_iterations", "spacing_warn_ratio"},
      "search");
  LfsgConfig config;
  config.epsilon = get_or<double>(j, "epsilon", config.epsilon);
  if (j.contains("split_mode"))
    config.split_mode = parse_split_mode(j.at("split_mode").get<std::string>());
  config.max_iterations = get_or<int>(j, "max_iterations", config.max_iterations);
  config.spacing_warn_ratio =
      get_or<double>(j, "spacing_warn_ratio", config.spacing_warn_ratio);
  return config;
}

// Fields shared by both document kinds.
template <typename Target>
void parse_common(const json& j, Target& out) {
  if (!j.contains("data") || !j.at("data").is_object())
    throw ConfigError("config: 'data' object with 'matrix' is required");
  const json& data = j.at("data");
  reject_unknown_keys(data, {"matrix", "labels"}, "data");
  out.matrix_path = get_or<std::string>(data, "matrix", "");
  out.labels_path = get_or<std::string>(data, "labels", "");
  if (out.matrix_path.empty())
    throw ConfigError("config: data.matrix path is required");

  if (j.contains("algorithm")) out.algo = parse_algo(j.at("algorithm"));

  if (!j.contains("grids") || !j.at("grids").is_object())
    throw ConfigError("config: 'grids' object with 'lambda' is required");
  const json& grids = j.at("grids");
  reject_unknown_keys(grids, {"lambda", "sigma2", "filter_order"}, "grids");
  if (!grids.contains("lambda"))
    throw ConfigError("config: grids.lambda is required");
  out.grid_lambda = parse_grid(grids.at("lambda"), "lambda");
  if (grids.contains("sigma2") && grids.contains("filter_order"))
    throw ConfigError("config: give at most one of grids.sigma2 / grids.filter_order");
  if (grids.contains("sigma2"))
    out.grid_second = parse_grid(grids.at("sigma2"), "sigma2");
  if (grids.contains("filter_order"))
    out.grid_second = parse_grid(grids.at("filter_order"), "filter_order");

  if (j.contains("metric"))
    out.metric = parse_metric(j.at("metric").get<std::string>());
  out.seed = get_or<std::uint64_t>(j, "seed", out.seed);
  if (j.contains("mode")) out.mode = parse_mode(j.at("mode").get<std::string>());
  if (j.contains("search")) out.search = parse_search(j.at("search"));
  out.search.metric = out.metric;
  out.threads = get_or<int>(j, "threads", out.threads);
  out.kmeans_restarts = get_or<int>(j, "kmeans_restarts", out.kmeans_restarts);

  // second-grid/kind consistency lives here so both commands report it early
  if (!out.grid_second.values.empty() && out.algo.kind == "lsr")
    throw ConfigError("config: lsr has a single hyperparameter; drop the second grid");
  if (grids.contains("sigma2") && out.algo.kind != "klsr")
    throw ConfigError("config: grids.sigma2 applies to kind 'klsr' only");
  if (grids.contains("filter_order") && out.algo.kind != "gf_lsr")
    throw ConfigError("config: grids.filter_order applies to kind 'gf_lsr' only");
}

const std::set<std::string> kCommonKeys = {
    "data", "algorithm", "grids", "metric", "seed",
    "mode", "search",    "threads", "kmeans_restarts"};

}  // namespace

HpoJob hpo_job_from_json_text(const std::string& text) {
  const json j = parse_json(text, "hpo config");
  std::set<std::string> known = kCommonKeys;
  known.insert("clusters");
  reject_unknown_keys(j, known, "hpo config");

  HpoJob job;
  parse_common(j, job);
  job.clusters = get_or<int>(j, "clusters", 0);
  if (job.labels_path.empty() && job.clusters < 1)
    throw ConfigError("hpo config: set 'clusters' or provide data.labels");
  if (job.labels_path.empty() && job.mode != BenchMode::Lfsg)
    throw ConfigError("hpo config: oracle modes need data.labels");
  return job;
}

HpoJob hpo_job_from_json_file(const std::string& path) {
  return hpo_job_from_json_text(slurp(path));
}

BenchConfig bench_config_from_json_text(const std::string& text) {
  const json j = parse_json(text, "bench config");
  std::set<std::string> known = kCommonKeys;
  known.insert("runs");
  known.insert("split");
  known.insert("subspace_dim");
  reject_unknown_keys(j, known, "bench config");

  BenchConfig config;
  parse_common(j, config);
  if (config.labels_path.empty())
    throw ConfigError("bench config: data.labels is required");
  config.runs = get_or<int>(j, "runs", config.runs);
  if (j.contains("split")) {
    const json& split = j.at("split");
    reject_unknown_keys(split, {"in_fraction"}, "split");
    config.in_fraction = get_or<double>(split, "in_fraction", config.in_fraction);
  }
  config.subspace_dim = get_or<int>(j, "subspace_dim", config.subspace_dim);
  return config;
}

BenchConfig bench_config_from_json_file(const std::string& path) {
  return bench_config_from_json_text(slurp(path));
}

std::string config_schema_text() {
  return R"(JSON config documents (all keys except the marked ones are optional).

Common keys (hpo and bench):
  data.matrix        path to the sample matrix, CSV (rows = features) or .bin   [required]
  data.labels        path to 1-based labels, one per line
  algorithm.kind     "lsr" | "klsr" | "gf_lsr"                       (default "lsr")
  algorithm.lambda   regularizer used when no lambda search runs     (default 1.0)
  algorithm.sigma2   Gaussian kernel bandwidth^2 for klsr            (default 1.0)
  algorithm.filter_order   graph filter order k for gf_lsr           (default 1)
  algorithm.gf_epsilon     gf_lsr affinity stop threshold            (default 1e-4)
  algorithm.gf_max_iter    gf_lsr refinement cap                     (default 50)
  grids.lambda       strictly increasing positive search values      [required]
  grids.sigma2       second grid, klsr only (runs the 2-stage search)
  grids.filter_order second grid, gf_lsr only, values rounded to ints
  metric             "acc" | "nmi"                                   (default "acc")
  seed               base RNG seed                                   (default 0)
  mode               "lfsg" | "oracle" | "both"         (hpo default "lfsg", bench "both")
  search.epsilon     relative-width stop threshold                   (default 0.001)
  search.split_mode  "thirds" | "halves"                             (default "thirds")
  search.max_iterations    refinement cap                            (default 60)
  search.spacing_warn_ratio  adjacent-ratio warning threshold        (default 2.0)
  threads            worker threads                                  (default 1)
  kmeans_restarts    k-means restarts per clustering                 (default 10)

hpo only:
  clusters           cluster count; required when data.labels is absent

bench only:
  data.labels        required (the protocol scores against the truth)
  runs               independent splits                              (default 25)
  split.in_fraction  per-class in-sample fraction                    (default 0.5)
  subspace_dim       d for the out-of-sample subspace fits           (default 9)
)";
}

}  // namespace lfsg
