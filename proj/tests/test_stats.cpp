#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>

#include "evovox/rng.hpp"
#include "evovox/stats.hpp"
#include "oracles.hpp"

using namespace evovox;

namespace {

SampleGroup group(std::string label, std::vector<double> values) {
  return {std::move(label), std::move(values)};
}

// Deterministic jittered cluster around a center.
std::vector<double> cluster(double center, double spread, int n, std::uint64_t seed) {
  RandomSource rng(seed);
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(center + rng.uniform(-spread, spread));
  return out;
}

double trapezoid(const std::vector<std::pair<double, double>>& pts) {
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    area += 0.5 * (pts[i].second + pts[i - 1].second) * (pts[i].first - pts[i - 1].first);
  return area;
}

double naive_kde_at(const std::vector<double>& values, double h, double x) {
  constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;
  double density = 0.0;
  for (double v : values) {
    const double u = (x - v) / h;
    density += std::exp(-0.5 * u * u);
  }
  return density * kInvSqrt2Pi / (static_cast<double>(values.size()) * h);
}

}  // namespace

TEST_CASE("chi-square upper tail matches closed forms") {
  // df = 2: Q(x) = exp(-x/2).
  CHECK(chi_square_upper_tail(7.2, 2) == doctest::Approx(std::exp(-3.6)).epsilon(1e-10));
  CHECK(chi_square_upper_tail(1.0, 2) == doctest::Approx(std::exp(-0.5)).epsilon(1e-10));
  // df = 4: Q(x) = exp(-x/2) * (1 + x/2).
  CHECK(chi_square_upper_tail(5.0, 4) ==
        doctest::Approx(std::exp(-2.5) * 3.5).epsilon(1e-10));
  // df = 1: Q(x) = erfc(sqrt(x/2)).
  CHECK(chi_square_upper_tail(3.84, 1) ==
        doctest::Approx(std::erfc(std::sqrt(1.92))).epsilon(1e-9));

  CHECK(chi_square_upper_tail(0.0, 3) == 1.0);
  CHECK(chi_square_upper_tail(-2.0, 3) == 1.0);
  CHECK_THROWS_AS(chi_square_upper_tail(1.0, 0), std::invalid_argument);
}

TEST_CASE("regularized gamma halves sum to one") {
  for (double a : {0.5, 1.0, 2.5, 7.0, 20.0})
    for (double x : {0.1, 1.0, 3.0, 10.0, 40.0})
      CHECK(regularized_gamma_p(a, x) + regularized_gamma_q(a, x) ==
            doctest::Approx(1.0).epsilon(1e-10));
  CHECK(regularized_gamma_p(2.0, 0.0) == 0.0);
  CHECK(regularized_gamma_q(2.0, 0.0) == 1.0);
  CHECK_THROWS_AS(regularized_gamma_p(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(regularized_gamma_q(1.0, -1.0), std::invalid_argument);
}

TEST_CASE("mid-ranks average over tie runs") {
  CHECK(mid_ranks({3.0, 1.0, 2.0}) == std::vector<double>{3.0, 1.0, 2.0});
  CHECK(mid_ranks({1.0, 2.0, 2.0, 3.0}) == std::vector<double>{1.0, 2.5, 2.5, 4.0});
  CHECK(mid_ranks({5.0, 5.0, 5.0}) == std::vector<double>{2.0, 2.0, 2.0});
  CHECK(mid_ranks({}).empty());
}

TEST_CASE("Kruskal-Wallis statistic on a textbook example") {
  const std::vector<SampleGroup> groups{
      group("a", {1, 2, 3}), group("b", {4, 5, 6}), group("c", {7, 8, 9})};
  const KruskalWallisResult r = kruskal_wallis(groups);
  // Rank sums 6, 15, 24 over n = 9: H = 12/(9*10) * (12+75+192) - 30 = 7.2.
  CHECK(r.H == doctest::Approx(7.2).epsilon(1e-12));
  CHECK(r.df == 2);
  CHECK(r.p_value == doctest::Approx(std::exp(-3.6)).epsilon(1e-10));
}

TEST_CASE("tie correction divides H by 1 - sum(t^3 - t)/(n^3 - n)") {
  // Pooled [1,2,2,2,3,3]: uncorrected H = 7/3, correction 1 - 30/210 = 6/7.
  const KruskalWallisResult r =
      kruskal_wallis({group("a", {1, 2, 2}), group("b", {2, 3, 3})});
  CHECK(r.H == doctest::Approx(49.0 / 18.0).epsilon(1e-12));
  CHECK(r.df == 1);
}

TEST_CASE("degenerate rank data yields H = 0, p = 1") {
  SUBCASE("all pooled values identical") {
    const KruskalWallisResult r =
        kruskal_wallis({group("a", {2, 2}), group("b", {2, 2, 2})});
    CHECK(r.H == 0.0);
    CHECK(r.p_value == 1.0);
  }
  SUBCASE("identical groups") {
    const KruskalWallisResult r =
        kruskal_wallis({group("a", {1, 2, 3}), group("b", {1, 2, 3})});
    CHECK(r.H == doctest::Approx(0.0));
    CHECK(r.p_value == doctest::Approx(1.0));
  }
}

TEST_CASE("Kruskal-Wallis input validation") {
  CHECK_THROWS_AS(kruskal_wallis({group("a", {1.0})}), std::invalid_argument);
  CHECK_THROWS_AS(kruskal_wallis({group("a", {1.0}), group("b", {})}),
                  std::invalid_argument);
  CHECK_THROWS_AS(kruskal_wallis({group("a", {1.0}), group("b", {std::nan("")})}),
                  std::invalid_argument);
}

TEST_CASE("chi-square p agrees with a permutation test") {
  // Moderately separated samples; the asymptotic p should land inside the
  // Monte-Carlo confidence band (plus slack for the approximation itself).
  const std::vector<SampleGroup> groups{
      group("a", {1.1, 2.3, 3.0, 4.8, 2.2, 3.7, 1.9, 4.1}),
      group("b", {3.9, 5.2, 6.1, 4.4, 5.8, 6.6, 4.9, 5.5}),
      group("c", {2.8, 4.0, 5.1, 3.3, 4.6, 3.1, 5.0, 4.2})};
  const KruskalWallisResult r = kruskal_wallis(groups);
  const oracles::PermutationP perm = oracles::permutation_kw_p(groups, 4000, 777);
  CHECK(std::abs(r.p_value - perm.p) < perm.half_width + 0.01);
}

TEST_CASE("rank statistics are invariant under monotone transforms") {
  const std::vector<SampleGroup> raw{
      group("a", {0.1, 0.9, 1.4, 2.0}), group("b", {1.1, 2.5, 3.0, 3.3}),
      group("c", {0.4, 1.6, 2.2, 2.8})};
  std::vector<SampleGroup> warped = raw;
  for (auto& g : warped)
    for (auto& v : g.values) v = std::exp(v);

  const KruskalWallisResult r1 = kruskal_wallis(raw);
  const KruskalWallisResult r2 = kruskal_wallis(warped);
  CHECK(r1.H == r2.H);
  CHECK(r1.p_value == r2.p_value);

  const auto d1 = dunns_test(raw);
  const auto d2 = dunns_test(warped);
  REQUIRE(d1.size() == d2.size());
  for (std::size_t i = 0; i < d1.size(); ++i) {
    CHECK(d1[i].z == d2[i].z);
    CHECK(d1[i].p_adjusted == d2[i].p_adjusted);
  }
}

TEST_CASE("Dunn z-scores on the textbook example") {
  const std::vector<SampleGroup> groups{
      group("a", {1, 2, 3}), group("b", {4, 5, 6}), group("c", {7, 8, 9})};
  const auto cmps = dunns_test(groups);
  REQUIRE(cmps.size() == 3);
  // Mean ranks 2, 5, 8; variance n(n+1)/12 * (1/3 + 1/3) = 5 per pair.
  const double unit = std::sqrt(5.0);
  CHECK(cmps[0].label_i == "a");
  CHECK(cmps[0].label_j == "b");
  CHECK(cmps[0].z == doctest::Approx(-3.0 / unit).epsilon(1e-12));
  CHECK(cmps[1].z == doctest::Approx(-6.0 / unit).epsilon(1e-12));
  CHECK(cmps[2].z == doctest::Approx(-3.0 / unit).epsilon(1e-12));
  // The extreme pair is the most significant.
  CHECK(std::abs(cmps[1].z) > std::abs(cmps[0].z));
  for (const auto& cmp : cmps) {
    CHECK(cmp.p_raw == doctest::Approx(std::erfc(std::abs(cmp.z) / std::sqrt(2.0)))
                           .epsilon(1e-12));
    CHECK(cmp.p_adjusted == doctest::Approx(std::min(1.0, cmp.p_raw * 3.0)).epsilon(1e-12));
  }
}

TEST_CASE("Dunn z flips sign when the pair order flips") {
  const SampleGroup a = group("a", {1, 2, 3, 4});
  const SampleGroup b = group("b", {3, 4, 5, 6});
  const auto fwd = dunns_test({a, b});
  const auto rev = dunns_test({b, a});
  REQUIRE(fwd.size() == 1);
  REQUIRE(rev.size() == 1);
  CHECK(fwd[0].z == -rev[0].z);
  CHECK(fwd[0].p_raw == rev[0].p_raw);
}

TEST_CASE("identical groups give z = 0 and p = 1") {
  const auto cmps = dunns_test({group("a", {1, 2, 3}), group("b", {1, 2, 3})});
  REQUIRE(cmps.size() == 1);
  CHECK(cmps[0].z == doctest::Approx(0.0));
  CHECK(cmps[0].p_raw == doctest::Approx(1.0));
  CHECK(cmps[0].p_adjusted == 1.0);
}

TEST_CASE("Bonferroni multiplies by the pair count and caps at 1") {
  std::vector<SampleGroup> groups;
  for (int g = 0; g < 4; ++g)
    groups.push_back(group(std::string(1, static_cast<char>('a' + g)),
                           cluster(g * 0.2, 1.0, 6, 40 + g)));
  const auto adjusted = dunns_test(groups, Adjustment::kBonferroni);
  const auto raw = dunns_test(groups, Adjustment::kNone);
  REQUIRE(adjusted.size() == 6);
  for (std::size_t i = 0; i < adjusted.size(); ++i) {
    CHECK(raw[i].p_adjusted == raw[i].p_raw);
    CHECK(adjusted[i].p_adjusted ==
          doctest::Approx(std::min(1.0, adjusted[i].p_raw * 6.0)).epsilon(1e-12));
    CHECK(adjusted[i].p_adjusted <= 1.0);
  }
}

TEST_CASE("Dunn tie term reduces the pooled variance") {
  // Heavy ties: pooled variance must use n(n+1)/12 - sum(t^3-t)/(12(n-1)).
  const std::vector<SampleGroup> groups{group("a", {1, 1, 2, 2}),
                                        group("b", {2, 2, 3, 3})};
  const auto cmps = dunns_test(groups, Adjustment::kNone);
  REQUIRE(cmps.size() == 1);
  // n = 8; ties: two 1s, four 2s, two 3s -> sum = 6 + 60 + 6 = 72.
  const double variance = (8.0 * 9.0 / 12.0 - 72.0 / (12.0 * 7.0)) * (0.25 + 0.25);
  // Mean ranks: a = (1.5+1.5+4.5+4.5)/4 = 3, b = (4.5+4.5+7.5+7.5)/4 = 6.
  CHECK(cmps[0].z == doctest::Approx(-3.0 / std::sqrt(variance)).epsilon(1e-12));
}

TEST_CASE("KDE matches the kernel formula pointwise and integrates to one") {
  RandomSource rng(99);
  std::vector<double> values;
  for (int i = 0; i < 120; ++i) values.push_back(rng.gaussian(0.0, 1.0));
  for (int i = 0; i < 80; ++i) values.push_back(rng.gaussian(5.0, 0.5));

  const KdeCurve curve = kde(values);
  REQUIRE(curve.points.size() == 256);
  CHECK_FALSE(curve.degenerate);
  CHECK(curve.bandwidth > 0.0);

  for (std::size_t i = 0; i < curve.points.size(); i += 17) {
    const auto [x, density] = curve.points[i];
    CHECK(density ==
          doctest::Approx(naive_kde_at(values, curve.bandwidth, x)).epsilon(1e-12));
  }

  // Integrating the kernel mixture over a wide margin recovers the full mass.
  const double lo = *std::min_element(values.begin(), values.end()) - 6.0 * curve.bandwidth;
  const double hi = *std::max_element(values.begin(), values.end()) + 6.0 * curve.bandwidth;
  std::vector<std::pair<double, double>> wide;
  for (int g = 0; g < 2048; ++g) {
    const double x = lo + (hi - lo) * g / 2047.0;
    wide.emplace_back(x, naive_kde_at(values, curve.bandwidth, x));
  }
  CHECK(trapezoid(wide) == doctest::Approx(1.0).epsilon(1e-3));
  // The reported grid (3h margins) still captures nearly everything.
  CHECK(trapezoid(curve.points) == doctest::Approx(1.0).epsilon(5e-3));
}

TEST_CASE("KDE of a symmetric sample is symmetric") {
  const KdeCurve curve = kde({-1.0, 0.0, 1.0});
  const std::size_t n = curve.points.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    CHECK(curve.points[i].second ==
          doctest::Approx(curve.points[n - 1 - i].second).epsilon(1e-9));
    CHECK(curve.points[i].first ==
          doctest::Approx(-curve.points[n - 1 - i].first).epsilon(1e-9));
  }
}

TEST_CASE("Silverman bandwidth follows 0.9 * min(sd, IQR/1.34) * n^(-1/5)") {
  const std::vector<double> values{1, 2, 3, 4, 5};
  const KdeCurve curve = kde(values);
  const double sd = std::sqrt(2.5);
  const double iqr_scale = 2.0 / 1.34;
  const double expected = 0.9 * std::min(sd, iqr_scale) * std::pow(5.0, -0.2);
  CHECK(curve.bandwidth == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("zero IQR falls back to the standard deviation") {
  // Six zeros and two tens: quartiles collapse but the sd does not.
  const std::vector<double> values{0, 0, 0, 0, 0, 0, 10, 0};
  const auto [mean, sd] = oracles::mean_sd(values);
  (void)mean;
  const KdeCurve curve = kde(values);
  CHECK_FALSE(curve.degenerate);
  CHECK(curve.bandwidth ==
        doctest::Approx(0.9 * sd * std::pow(8.0, -0.2)).epsilon(1e-12));
}

TEST_CASE("single-value samples are flagged degenerate") {
  const KdeCurve curve = kde({3.0});
  CHECK(curve.degenerate);
  CHECK(curve.bandwidth == 1.0);  // fallback scale
  double peak = 0.0;
  for (const auto& [x, d] : curve.points) {
    (void)x;
    peak = std::max(peak, d);
  }
  CHECK(peak == doctest::Approx(0.3989422804).epsilon(0.01));

  // An explicit bandwidth sidesteps estimation, so no degenerate flag.
  const KdeCurve fixed = kde({3.0, 3.0, 3.0}, 0.5);
  CHECK_FALSE(fixed.degenerate);
  CHECK(fixed.bandwidth == 0.5);
}

TEST_CASE("KDE input validation") {
  CHECK_THROWS_AS(kde({}), std::invalid_argument);
  CHECK_THROWS_AS(kde({1.0, 2.0}, {}, 1), std::invalid_argument);
  CHECK_THROWS_AS(kde({1.0, 2.0}, 0.0), std::invalid_argument);
  CHECK(kde({1.0, 2.0}, {}, 64).points.size() == 64);
}

TEST_CASE("summary statistics") {
  const GroupSummary s = summarize({1, 2, 3, 4});
  CHECK(s.min == 1.0);
  CHECK(s.max == 4.0);
  CHECK(s.median == 2.5);
  CHECK(s.mean == 2.5);
  CHECK(s.sd == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-12));

  CHECK(summarize({5, 1, 3}).median == 3.0);
  const GroupSummary single = summarize({7.0});
  CHECK(single.sd == 0.0);
  CHECK(single.median == 7.0);
  CHECK_THROWS_AS(summarize({}), std::invalid_argument);

  RandomSource rng(17);
  std::vector<double> values;
  for (int i = 0; i < 50; ++i) values.push_back(rng.gaussian(2.0, 3.0));
  const GroupSummary g = summarize(values);
  const auto [mean, sd] = oracles::mean_sd(values);
  CHECK(g.mean == doctest::Approx(mean).epsilon(1e-12));
  CHECK(g.sd == doctest::Approx(sd).epsilon(1e-12));
}

TEST_CASE("rank_groups clusters indistinguishable groups") {
  const std::vector<SampleGroup> groups{group("a", {10, 11, 12}),
                                        group("b", {5, 6, 7}),
                                        group("c", {5.1, 6.1, 7.1})};
  const auto make_pairwise = [](double p_ab, double p_ac, double p_bc) {
    std::vector<PairwiseComparison> out(3);
    out[0] = {"a", "b", 0.0, p_ab, p_ab};
    out[1] = {"a", "c", 0.0, p_ac, p_ac};
    out[2] = {"b", "c", 0.0, p_bc, p_bc};
    return out;
  };

  SUBCASE("fully separated") {
    const auto ranking = rank_groups(groups, make_pairwise(0.001, 0.001, 0.001), 0.01);
    REQUIRE(ranking.size() == 3);
    CHECK(ranking[0] == std::vector<std::string>{"a"});
    CHECK(ranking[1] == std::vector<std::string>{"c"});  // higher mean rank than b
    CHECK(ranking[2] == std::vector<std::string>{"b"});
    CHECK(ranking_text(ranking) == "a > c > b");
  }
  SUBCASE("tail pair merges") {
    const auto ranking = rank_groups(groups, make_pairwise(0.001, 0.001, 0.5), 0.01);
    REQUIRE(ranking.size() == 2);
    CHECK(ranking[0] == std::vector<std::string>{"a"});
    CHECK(ranking[1] == std::vector<std::string>{"c", "b"});
    CHECK(ranking_text(ranking) == "a > c = b");
  }
  SUBCASE("chained overlap pulls everything into one cluster") {
    // a~c indistinguishable, c~b indistinguishable: b joins even though a vs b
    // separates, because a cluster only splits when the newcomer separates
    // from every member.
    const auto ranking = rank_groups(groups, make_pairwise(0.001, 0.5, 0.5), 0.01);
    REQUIRE(ranking.size() == 1);
    CHECK(ranking[0] == std::vector<std::string>{"a", "c", "b"});
  }
}

TEST_CASE("analyze_groups produces the full report") {
  // 20 samples per group: with fully separated ranks the adjacent-pair Dunn
  // z is ~3.6, comfortably significant at alpha 0.01 (12 would not be).
  std::vector<SampleGroup> groups{group("slow", cluster(1.0, 0.5, 20, 1)),
                                  group("fast", cluster(9.0, 0.5, 20, 2)),
                                  group("mid", cluster(5.0, 0.5, 20, 3))};
  const TestReport report = analyze_groups(groups, 0.01);
  REQUIRE(report.kruskal_wallis.has_value());
  CHECK(report.kruskal_wallis->p_value < 0.01);
  CHECK(report.pairwise.size() == 3);
  REQUIRE(report.ranking.size() == 3);
  CHECK(report.ranking[0] == std::vector<std::string>{"fast"});
  CHECK(report.ranking[1] == std::vector<std::string>{"mid"});
  CHECK(report.ranking[2] == std::vector<std::string>{"slow"});
  REQUIRE(report.summaries.size() == 3);
  CHECK(report.summaries[0].first == "slow");

  const nlohmann::json j = test_report_to_json(report);
  CHECK(j.contains("kruskal_wallis"));
  CHECK(j["pairwise"].size() == 3);
  CHECK(j["ranking_text"] == "fast > mid > slow");
  CHECK(j["summaries"][0]["label"] == "slow");
}

TEST_CASE("a single group gets summaries but no omnibus test") {
  const TestReport report = analyze_groups({group("only", {1, 2, 3})});
  CHECK_FALSE(report.kruskal_wallis.has_value());
  CHECK(report.pairwise.empty());
  REQUIRE(report.ranking.size() == 1);
  CHECK(report.ranking[0] == std::vector<std::string>{"only"});
  CHECK(test_report_to_json(report)["kruskal_wallis"].is_null());
}
