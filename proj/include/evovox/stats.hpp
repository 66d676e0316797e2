#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace evovox {

struct SampleGroup {
  std::string label;
  std::vector<double> values;
};

struct KruskalWallisResult {
  double H = 0.0;
  int df = 0;
  double p_value = 1.0;
};

struct PairwiseComparison {
  std::string label_i;
  std::string label_j;
  double z = 0.0;
  double p_raw = 1.0;
  double p_adjusted = 1.0;
};

enum class Adjustment { kNone, kBonferroni };

struct GroupSummary {
  double min = 0.0, max = 0.0, median = 0.0, mean = 0.0, sd = 0.0;
};

struct KdeCurve {
  std::vector<std::pair<double, double>> points;  // (x, density)
  double bandwidth = 0.0;
  bool degenerate = false;  // fewer than 2 distinct values
};

struct TestReport {
  std::optional<KruskalWallisResult> kruskal_wallis;
  std::vector<PairwiseComparison> pairwise;
  // Ordered clusters, best mean rank first; labels within a cluster are
  // statistically indistinguishable at the chosen alpha.
  std::vector<std::vector<std::string>> ranking;
  std::vector<std::pair<std::string, GroupSummary>> summaries;
};

// Chi-square upper tail via the regularized incomplete gamma function
// (series + continued fraction, relative tolerance 1e-10).
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);
double chi_square_upper_tail(double statistic, int df);

// Mid-ranks of the pooled sample, in pooled order.
std::vector<double> mid_ranks(const std::vector<double>& pooled);

// H with tie correction; degenerate all-equal data yields H = 0, p = 1.
KruskalWallisResult kruskal_wallis(const std::vector<SampleGroup>& groups);

std::vector<PairwiseComparison> dunns_test(const std::vector<SampleGroup>& groups,
                                           Adjustment adjustment = Adjustment::kBonferroni);

KdeCurve kde(const std::vector<double>& values, std::optional<double> bandwidth = {},
             int grid_points = 256);

GroupSummary summarize(const std::vector<double>& values);

// Clusters groups by mean rank (best first), merging groups whose pairwise
// adjusted p is at or above alpha; the ranking is a partial order.
std::vector<std::vector<std::string>> rank_groups(const std::vector<SampleGroup>& groups,
                                                  const std::vector<PairwiseComparison>& pairwise,
                                                  double alpha = 0.01);

// "A > B = C > D" presentation of a clustered ranking.
std::string ranking_text(const std::vector<std::vector<std::string>>& ranking);

TestReport analyze_groups(const std::vector<SampleGroup>& groups, double alpha = 0.01);
nlohmann::json test_report_to_json(const TestReport& report);

}  // namespace evovox
