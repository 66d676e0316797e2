#include "evovox/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace evovox {

namespace {

constexpr double kGammaTolerance = 1e-10;

double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 10000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kGammaTolerance) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_continued_fraction(double a, double x) {
  // Lentz's algorithm for the continued-fraction expansion of Q(a, x).
  const double tiny = std::numeric_limits<double>::min() / kGammaTolerance;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kGammaTolerance) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

void validate_groups(const std::vector<SampleGroup>& groups, std::size_t minimum) {
  if (groups.size() < minimum)
    throw std::invalid_argument("need at least " + std::to_string(minimum) + " groups");
  for (const auto& g : groups) {
    if (g.values.empty())
      throw std::invalid_argument("group '" + g.label + "' is empty");
    for (double v : g.values)
      if (!std::isfinite(v))
        throw std::invalid_argument("group '" + g.label + "' has a non-finite value");
  }
}

// Sum of t^3 - t over tie runs of the pooled sample.
double tie_cubic_sum(std::vector<double> pooled) {
  std::sort(pooled.begin(), pooled.end());
  double total = 0.0;
  std::size_t i = 0;
  while (i < pooled.size()) {
    std::size_t j = i + 1;
    while (j < pooled.size() && pooled[j] == pooled[i]) ++j;
    const double t = static_cast<double>(j - i);
    total += t * t * t - t;
    i = j;
  }
  return total;
}

std::vector<double> group_mean_ranks(const std::vector<SampleGroup>& groups,
                                     std::size_t& total_out) {
  std::vector<double> pooled;
  for (const auto& g : groups) pooled.insert(pooled.end(), g.values.begin(), g.values.end());
  total_out = pooled.size();
  const std::vector<double> ranks = mid_ranks(pooled);
  std::vector<double> means(groups.size(), 0.0);
  std::size_t offset = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    double sum = 0.0;
    for (std::size_t i = 0; i < groups[g].values.size(); ++i) sum += ranks[offset + i];
    means[g] = sum / static_cast<double>(groups[g].values.size());
    offset += groups[g].values.size();
  }
  return means;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty data");
  if (sorted.size() == 1) return sorted[0];
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - std::floor(pos);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw std::invalid_argument("regularized_gamma_p: a must be > 0");
  if (x < 0.0) throw std::invalid_argument("regularized_gamma_p: x must be >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_continued_fraction(a, x);
}

double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0)) throw std::invalid_argument("regularized_gamma_q: a must be > 0");
  if (x < 0.0) throw std::invalid_argument("regularized_gamma_q: x must be >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_continued_fraction(a, x);
}

double chi_square_upper_tail(double statistic, int df) {
  if (df < 1) throw std::invalid_argument("chi_square_upper_tail: df must be >= 1");
  if (statistic <= 0.0) return 1.0;
  return regularized_gamma_q(static_cast<double>(df) / 2.0, statistic / 2.0);
}

std::vector<double> mid_ranks(const std::vector<double>& pooled) {
  std::vector<std::size_t> order(pooled.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
  std::vector<double> ranks(pooled.size(), 0.0);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && pooled[order[j]] == pooled[order[i]]) ++j;
    // Tied run occupies ranks i+1 .. j; everyone gets the average.
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = mid;
    i = j;
  }
  return ranks;
}

KruskalWallisResult kruskal_wallis(const std::vector<SampleGroup>& groups) {
  validate_groups(groups, 2);
  std::size_t total = 0;
  const std::vector<double> means = group_mean_ranks(groups, total);
  const double n = static_cast<double>(total);

  double h = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double ni = static_cast<double>(groups[g].values.size());
    const double ri = means[g] * ni;  // rank sum
    h += ri * ri / ni;
  }
  h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);

  std::vector<double> pooled;
  for (const auto& g : groups) pooled.insert(pooled.end(), g.values.begin(), g.values.end());
  const double correction = 1.0 - tie_cubic_sum(pooled) / (n * n * n - n);

  KruskalWallisResult result;
  result.df = static_cast<int>(groups.size()) - 1;
  if (correction <= 0.0) {
    // All pooled values identical: no separation by construction.
    result.H = 0.0;
    result.p_value = 1.0;
    return result;
  }
  result.H = h / correction;
  if (result.H < 0.0 && result.H > -1e-12) result.H = 0.0;
  result.p_value = chi_square_upper_tail(result.H, result.df);
  return result;
}

std::vector<PairwiseComparison> dunns_test(const std::vector<SampleGroup>& groups,
                                           Adjustment adjustment) {
  validate_groups(groups, 2);
  std::size_t total = 0;
  const std::vector<double> means = group_mean_ranks(groups, total);
  const double n = static_cast<double>(total);

  std::vector<double> pooled;
  for (const auto& g : groups) pooled.insert(pooled.end(), g.values.begin(), g.values.end());
  const double tie_term = tie_cubic_sum(pooled) / (12.0 * (n - 1.0));
  const double base_variance = n * (n + 1.0) / 12.0 - tie_term;

  const std::size_t k = groups.size();
  const double pair_count = static_cast<double>(k * (k - 1) / 2);
  std::vector<PairwiseComparison> out;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      PairwiseComparison cmp;
      cmp.label_i = groups[i].label;
      cmp.label_j = groups[j].label;
      const double ni = static_cast<double>(groups[i].values.size());
      const double nj = static_cast<double>(groups[j].values.size());
      const double variance = base_variance * (1.0 / ni + 1.0 / nj);
      if (variance <= 0.0) {
        cmp.z = 0.0;
        cmp.p_raw = 1.0;
        cmp.p_adjusted = 1.0;
      } else {
        cmp.z = (means[i] - means[j]) / std::sqrt(variance);
        cmp.p_raw = std::erfc(std::fabs(cmp.z) / std::sqrt(2.0));
        cmp.p_adjusted = adjustment == Adjustment::kBonferroni
                             ? std::min(1.0, cmp.p_raw * pair_count)
                             : cmp.p_raw;
      }
      out.push_back(cmp);
    }
  }
  return out;
}

KdeCurve kde(const std::vector<double>& values, std::optional<double> bandwidth,
             int grid_points) {
  if (values.empty()) throw std::invalid_argument("kde: empty sample");
  if (grid_points < 2) throw std::invalid_argument("kde: need at least 2 grid points");

  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const bool all_equal = sorted.front() == sorted.back();

  KdeCurve curve;
  double h;
  if (bandwidth) {
    h = *bandwidth;
    if (!(h > 0.0)) throw std::invalid_argument("kde: bandwidth must be > 0");
  } else {
    const GroupSummary s = summarize(values);
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    // Silverman: 0.9 * min(sd, IQR/1.34) * n^(-1/5). A zero IQR with spread-out
    // data would zero the bandwidth, so fall back to whichever scale is positive.
    double scale = std::min(s.sd, iqr / 1.34);
    if (scale <= 0.0) scale = std::max(s.sd, iqr / 1.34);
    h = 0.9 * scale * std::pow(static_cast<double>(values.size()), -0.2);
    if (h <= 0.0) {
      // Fewer than 2 distinct values: flag a degenerate spike at the value.
      curve.degenerate = true;
      h = 1.0;
    }
  }
  curve.degenerate = curve.degenerate || (all_equal && !bandwidth);
  curve.bandwidth = h;

  const double lo = sorted.front() - 3.0 * h;
  const double hi = sorted.back() + 3.0 * h;
  const double inv_nh = 1.0 / (static_cast<double>(values.size()) * h);
  constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;
  curve.points.reserve(static_cast<std::size_t>(grid_points));
  for (int g = 0; g < grid_points; ++g) {
    const double x =
        lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(grid_points - 1);
    double density = 0.0;
    for (double v : values) {
      const double u = (x - v) / h;
      density += std::exp(-0.5 * u * u);
    }
    curve.points.emplace_back(x, density * kInvSqrt2Pi * inv_nh);
  }
  return curve;
}

GroupSummary summarize(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("summarize: empty sample");
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  GroupSummary s;
  s.min = sorted.front();
  s.max = sorted.back();
  const std::size_t n = sorted.size();
  s.median = n % 2 == 1 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
  double sum = 0.0;
  for (double v : sorted) sum += v;
  s.mean = sum / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double v : sorted) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return s;
}

std::vector<std::vector<std::string>> rank_groups(
    const std::vector<SampleGroup>& groups, const std::vector<PairwiseComparison>& pairwise,
    double alpha) {
  validate_groups(groups, 1);
  std::size_t total = 0;
  const std::vector<double> means = group_mean_ranks(groups, total);

  std::map<std::pair<std::string, std::string>, double> adjusted;
  for (const auto& cmp : pairwise) {
    adjusted[{cmp.label_i, cmp.label_j}] = cmp.p_adjusted;
    adjusted[{cmp.label_j, cmp.label_i}] = cmp.p_adjusted;
  }
  const auto distinguishable = [&](const std::string& a, const std::string& b) {
    const auto it = adjusted.find({a, b});
    return it != adjusted.end() && it->second < alpha;
  };

  std::vector<std::size_t> order(groups.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (means[a] != means[b]) return means[a] > means[b];
    return groups[a].label < groups[b].label;
  });

  std::vector<std::vector<std::string>> clusters;
  for (std::size_t idx : order) {
    const std::string& label = groups[idx].label;
    if (!clusters.empty()) {
      bool separable = true;
      for (const auto& member : clusters.back())
        if (!distinguishable(member, label)) {
          separable = false;
          break;
        }
      if (!separable) {
        clusters.back().push_back(label);
        continue;
      }
    }
    clusters.push_back({label});
  }
  return clusters;
}

std::string ranking_text(const std::vector<std::vector<std::string>>& ranking) {
  std::string out;
  for (std::size_t c = 0; c < ranking.size(); ++c) {
    if (c) out += " > ";
    for (std::size_t m = 0; m < ranking[c].size(); ++m) {
      if (m) out += " = ";
      out += ranking[c][m];
    }
  }
  return out;
}

TestReport analyze_groups(const std::vector<SampleGroup>& groups, double alpha) {
  validate_groups(groups, 1);
  TestReport report;
  for (const auto& g : groups) report.summaries.emplace_back(g.label, summarize(g.values));
  if (groups.size() < 2) {
    report.ranking = {{groups[0].label}};
    return report;
  }
  report.kruskal_wallis = kruskal_wallis(groups);
  report.pairwise = dunns_test(groups);
  report.ranking = rank_groups(groups, report.pairwise, alpha);
  return report;
}

nlohmann::json test_report_to_json(const TestReport& report) {
  nlohmann::json j;
  if (report.kruskal_wallis) {
    j["kruskal_wallis"] = {{"H", report.kruskal_wallis->H},
                           {"df", report.kruskal_wallis->df},
                           {"p_value", report.kruskal_wallis->p_value}};
  } else {
    j["kruskal_wallis"] = nullptr;
  }
  j["pairwise"] = nlohmann::json::array();
  for (const auto& cmp : report.pairwise) {
    j["pairwise"].push_back({{"label_i", cmp.label_i},
                             {"label_j", cmp.label_j},
                             {"z", cmp.z},
                             {"p_raw", cmp.p_raw},
                             {"p_adjusted", cmp.p_adjusted}});
  }
  j["ranking"] = report.ranking;
  j["ranking_text"] = ranking_text(report.ranking);
  j["summaries"] = nlohmann::json::array();
  for (const auto& [label, s] : report.summaries) {
    j["summaries"].push_back({{"label", label},
                              {"min", s.min},
                              {"max", s.max},
                              {"median", s.median},
                              {"mean", s.mean},
                              {"sd", s.sd}});
  }
  return j;
}

}  // namespace evovox
