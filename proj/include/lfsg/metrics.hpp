#pragma once

#include <vector>

#include "lfsg/types.hpp"

namespace lfsg {

/// Joint label-count table. Distinct label values in each argument are
/// mapped to compact row/column indices in sorted order.
struct Contingency {
  std::vector<std::vector<long>> counts;  // C1 x C2
  std::vector<long> row_sums;             // size C1
  std::vector<long> col_sums;             // size C2
  long total = 0;
};

Contingency contingency(const Labels& y1, const Labels& y2);

enum class MetricKind { ACC, NMI };

/// Clustering accuracy in percent: best agreement over label matchings,
/// found by optimal assignment on the contingency table.
double acc(const Labels& y1, const Labels& y2);

/// Normalized mutual information in percent, MI / sqrt(H1*H2). Natural log.
/// If either partition has zero entropy: 100 when both are a single
/// cluster, otherwise 0.
double nmi(const Labels& y1, const Labels& y2);

double metric_score(MetricKind kind, const Labels& y1, const Labels& y2);

/// Pairwise F1 in percent over unordered sample pairs; a pair is positive
/// iff co-clustered. 0 when precision + recall is 0.
double pairwise_f1(const Labels& y1, const Labels& y2);

/// Two-sided Wilcoxon rank-sum (Mann-Whitney) p-value. Exact distribution
/// when min(|a|,|b|) <= 8 and the pooled sample has no ties; otherwise
/// normal approximation with tie correction and continuity correction.
double ranksum(const std::vector<double>& a, const std::vector<double>& b);

/// Minimum-cost assignment (square cost matrix); returns, per row, the
/// assigned column. O(n^3).
std::vector<int> hungarian(const Matrix& cost);

}  // namespace lfsg
