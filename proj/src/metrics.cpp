#include "lfsg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "lfsg/errors.hpp"

namespace lfsg {
namespace {

std::map<int, int> compact_map(const Labels& y) {
  std::map<int, int> m;
  for (const int v : y) m.emplace(v, 0);
  int next = 0;
  for (auto& [value, index] : m) index = next++;
  return m;
}

}  // namespace

Contingency contingency(const Labels& y1, const Labels& y2) {
  if (y1.size() != y2.size())
    throw LengthMismatch("contingency: label vectors differ in length");
  if (y1.empty()) throw LengthMismatch("contingency: empty label vectors");

  const auto m1 = compact_map(y1);
  const auto m2 = compact_map(y2);
  const std::size_t c1 = m1.size();
  const std::size_t c2 = m2.size();

  Contingency table;
  table.counts.assign(c1, std::vector<long>(c2, 0));
  table.row_sums.assign(c1, 0);
  table.col_sums.assign(c2, 0);
  table.total = static_cast<long>(y1.size());
  for (std::size_t n = 0; n < y1.size(); ++n) {
    const int a = m1.at(y1[n]);
    const int b = m2.at(y2[n]);
    ++table.counts[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    ++table.row_sums[static_cast<std::size_t>(a)];
    ++table.col_sums[static_cast<std::size_t>(b)];
  }
  return table;
}

std::vector<int> hungarian(const Matrix& cost) {
  if (cost.rows() != cost.cols()) throw NonSquare("hungarian: square matrix required");
  const int n = static_cast<int>(cost.rows());
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // potentials over rows (u) and columns (v); p[j] = row matched to column j
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> p(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);

  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, kInf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                           v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    row_to_col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] =
        j - 1;
  return row_to_col;
}

double acc(const Labels& y1, const Labels& y2) {
  const Contingency table = contingency(y1, y2);
  const std::size_t c1 = table.counts.size();
  const std::size_t c2 = table.counts[0].size();
  const std::size_t k = std::max(c1, c2);

  // pad with zeros to a square matrix, negate counts so min-cost = max-match
  Matrix cost = Matrix::Zero(static_cast<Eigen::Index>(k),
                             static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < c1; ++i)
    for (std::size_t j = 0; j < c2; ++j)
      cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          -static_cast<double>(table.counts[i][j]);

  const std::vector<int> match = hungarian(cost);
  long agreed = 0;
  for (std::size_t i = 0; i < c1; ++i) {
    const std::size_t j = static_cast<std::size_t>(match[i]);
    if (j < c2) agreed += table.counts[i][j];
  }
  return 100.0 * static_cast<double>(agreed) /
         static_cast<double>(table.total);
}

double nmi(const Labels& y1, const Labels& y2) {
  const Contingency table = contingency(y1, y2);
  const double N = static_cast<double>(table.total);

  auto entropy = [N](const std::vector<long>& sums) {
    double h = 0.0;
    for (const long s : sums) {
      if (s == 0) continue;
      const double p = static_cast<double>(s) / N;
      h -= p * std::log(p);
    }
    return h;
  };
  const double h1 = entropy(table.row_sums);
  const double h2 = entropy(table.col_sums);
  if (h1 == 0.0 || h2 == 0.0) {
    // zero entropy means a single cluster; partitions agree iff both are
    return (table.counts.size() == 1 && table.counts[0].size() == 1) ? 100.0
                                                                     : 0.0;
  }

  double mi = 0.0;
  for (std::size_t i = 0; i < table.counts.size(); ++i) {
    for (std::size_t j = 0; j < table.counts[i].size(); ++j) {
      const long n_ab = table.counts[i][j];
      if (n_ab == 0) continue;
      const double p_ab = static_cast<double>(n_ab) / N;
      mi += p_ab * std::log(static_cast<double>(n_ab) * N /
                            (static_cast<double>(table.row_sums[i]) *
                             static_cast<double>(table.col_sums[j])));
    }
  }
  const double value = 100.0 * mi / std::sqrt(h1 * h2);
  return std::clamp(value, 0.0, 100.0);
}

double metric_score(MetricKind kind, const Labels& y1, const Labels& y2) {
  return kind == MetricKind::ACC ? acc(y1, y2) : nmi(y1, y2);
}

double pairwise_f1(const Labels& y1, const Labels& y2) {
  const Contingency table = contingency(y1, y2);
  if (table.total < 2)
    throw InvalidSpec("pairwise_f1: need at least two samples");

  auto pairs = [](long n) { return n * (n - 1) / 2; };
  long tp = 0;
  for (const auto& row : table.counts)
    for (const long n_ab : row) tp += pairs(n_ab);
  long pred_pairs = 0;
  for (const long s : table.row_sums) pred_pairs += pairs(s);
  long true_pairs = 0;
  for (const long s : table.col_sums) true_pairs += pairs(s);

  const double precision =
      pred_pairs > 0 ? static_cast<double>(tp) / static_cast<double>(pred_pairs)
                     : 0.0;
  const double recall =
      true_pairs > 0 ? static_cast<double>(tp) / static_cast<double>(true_pairs)
                     : 0.0;
  if (precision + recall == 0.0) return 0.0;
  return 100.0 * 2.0 * precision * recall / (precision + recall);
}

namespace {

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

// Exact two-sided p from the null distribution of the rank sum of the
// first sample: counts[s] = #subsets of size n of {1..n+m} with sum s.
double ranksum_exact(std::size_t n, std::size_t m, double w_obs) {
  const std::size_t total_ranks = n + m;
  const std::size_t max_sum = total_ranks * (total_ranks + 1) / 2;
  std::vector<std::vector<long double>> ways(
      n + 1, std::vector<long double>(max_sum + 1, 0.0L));
  ways[0][0] = 1.0L;
  for (std::size_t r = 1; r <= total_ranks; ++r) {
    for (std::size_t k = std::min(n, r); k >= 1; --k) {
      for (std::size_t s = max_sum; s >= r; --s) {
        ways[k][s] += ways[k - 1][s - r];
      }
    }
  }
  long double total = 0.0L;
  for (long double c : ways[n]) total += c;

  const double lo = static_cast<double>(n * (n + 1) / 2);
  const double hi = lo + static_cast<double>(n * m);
  const double mirror = lo + hi - w_obs;  // distribution is symmetric
  const double w_low = std::min(w_obs, mirror);
  const double w_high = std::max(w_obs, mirror);

  long double tail = 0.0L;
  for (std::size_t s = 0; s <= max_sum; ++s) {
    const double sd = static_cast<double>(s);
    if (sd <= w_low + 1e-9 || sd >= w_high - 1e-9) tail += ways[n][s];
  }
  const double p = static_cast<double>(tail / total);
  return std::min(p, 1.0);
}

}  // namespace

double ranksum(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw EmptySample("ranksum: empty sample");
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const std::size_t N = n + m;

  // pool and midrank
  std::vector<std::pair<double, int>> pooled;  // (value, 0 for a / 1 for b)
  pooled.reserve(N);
  for (const double x : a) pooled.emplace_back(x, 0);
  for (const double x : b) pooled.emplace_back(x, 1);
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& p, const auto& q) { return p.first < q.first; });

  bool has_ties = false;
  double w_a = 0.0;          // rank sum of sample a (midranks)
  double tie_term = 0.0;     // sum of t^3 - t over tie groups
  std::size_t i = 0;
  while (i < N) {
    std::size_t j = i;
    while (j + 1 < N && pooled[j + 1].first == pooled[i].first) ++j;
    const std::size_t t = j - i + 1;
    if (t > 1) {
      has_ties = true;
      tie_term += static_cast<double>(t) * t * t - static_cast<double>(t);
    }
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k)
      if (pooled[k].second == 0) w_a += midrank;
    i = j + 1;
  }

  if (std::min(n, m) <= 8 && !has_ties) {
    return ranksum_exact(n, m, w_a);
  }

  const double mean = static_cast<double>(n) * (static_cast<double>(N) + 1.0) / 2.0;
  double var = static_cast<double>(n) * static_cast<double>(m) / 12.0 *
               ((static_cast<double>(N) + 1.0) -
                tie_term / (static_cast<double>(N) * (static_cast<double>(N) - 1.0)));
  if (var <= 0.0) return 1.0;  // fully tied pool carries no ordering signal
  double diff = w_a - mean;
  // continuity correction pulls |diff| toward zero by half a rank unit
  if (diff > 0.5) {
    diff -= 0.5;
  } else if (diff < -0.5) {
    diff += 0.5;
  } else {
    diff = 0.0;
  }
  const double z = diff / std::sqrt(var);
  return std::min(1.0, 2.0 * normal_sf(std::abs(z)));
}

}  // namespace lfsg
