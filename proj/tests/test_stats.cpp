#include <gtest/gtest.h>

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>

#include "caufrac/errors.hpp"
#include "caufrac/stats.hpp"
#include "support.hpp"

using namespace caufrac;
using namespace caufrac::stats;
using namespace caufrac::testing;

namespace {

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sab += (a[k] - ma) * (b[k] - mb);
    saa += (a[k] - ma) * (a[k] - ma);
    sbb += (b[k] - mb) * (b[k] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// Ranks by counting: 1 + #smaller + (#equal - 1) / 2.
std::vector<double> naive_ranks(const std::vector<double>& v) {
  std::vector<double> r;
  for (double x : v) {
    double less = 0, equal = 0;
    for (double y : v) {
      less += y < x;
      equal += y == x;
    }
    r.push_back(1 + less + (equal - 1) / 2);
  }
  return r;
}

// Two-sided p-value over all n! relabelings of y.
double brute_permutation_p(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = naive_ranks(x);
  auto ry = naive_ranks(y);
  const double observed = std::abs(pearson(rx, ry));
  std::sort(ry.begin(), ry.end());
  std::size_t hits = 0, total = 0;
  do {
    ++total;
    hits += std::abs(pearson(rx, ry)) >= observed - 1e-12;
  } while (std::next_permutation(ry.begin(), ry.end()));
  return static_cast<double>(hits) / static_cast<double>(total);
}

double t_p_value(double rho, std::size_t n) {
  const double df = static_cast<double>(n) - 2;
  const double t = rho * std::sqrt(df / (1 - rho * rho));
  return 2 * boost::math::cdf(boost::math::complement(boost::math::students_t(df), std::abs(t)));
}

std::vector<double> random_values(Gen& gen, std::size_t n, std::size_t levels = 0) {
  std::vector<double> v;
  for (std::size_t k = 0; k < n; ++k) v.push_back(levels ? static_cast<double>(gen.below(levels)) : gen.unit());
  return v;
}

}  // namespace

TEST(Spearman, PerfectMonotone) {
  const auto up = spearman({1, 2, 3}, {10, 20, 30});
  EXPECT_DOUBLE_EQ(up.rho, 1);
  EXPECT_EQ(up.n, 3U);
  EXPECT_EQ(up.method, PValueMethod::exact_permutation);
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3}, {3, 2, 1}).rho, -1);
}

TEST(Spearman, MidRanksWithTies) {
  EXPECT_EQ(mid_ranks({1, 2, 2, 4}), (std::vector<double>{1, 2.5, 2.5, 4}));
  const auto r = spearman({1, 2, 2, 4}, {1, 3, 2, 4});
  EXPECT_NEAR(r.rho, 0.9486832980505138, 1e-15);
  EXPECT_NEAR(r.rho, 3 / std::sqrt(10.0), 1e-15);
}

TEST(Spearman, Errors) {
  EXPECT_THROW(spearman({1, 2}, {1, 2}), ShapeError);
  EXPECT_THROW(spearman({1, 2, 3}, {1, 2}), ShapeError);
  EXPECT_THROW(spearman({1, 1, 1}, {1, 2, 3}), ConstantInputError);
  EXPECT_THROW(spearman({1, 2, 3}, {5, 5, 5}), ConstantInputError);
}

TEST(Spearman, ExactPValueMatchesBruteForce) {
  Gen gen(51);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 3 + gen.below(5);
    const auto x = random_values(gen, n, trial % 2 ? 3 : 0);
    const auto y = random_values(gen, n, trial % 3 ? 0 : 3);
    if (std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) == x.end()) continue;
    if (std::adjacent_find(y.begin(), y.end(), std::not_equal_to<>()) == y.end()) continue;
    const auto r = spearman(x, y);
    EXPECT_EQ(r.method, PValueMethod::exact_permutation);
    EXPECT_NEAR(r.rho, pearson(naive_ranks(x), naive_ranks(y)), 1e-12);
    EXPECT_NEAR(r.p_value, brute_permutation_p(x, y), 1e-12) << "trial " << trial;
  }
}

TEST(Spearman, TApproximationAboveNine) {
  Gen gen(53);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 10 + gen.below(40);
    const auto x = random_values(gen, n);
    auto y = random_values(gen, n);
    for (std::size_t k = 0; k < n; ++k) y[k] += 0.5 * x[k];
    const auto r = spearman(x, y);
    EXPECT_EQ(r.method, PValueMethod::t_approximation);
    EXPECT_NEAR(r.p_value, t_p_value(r.rho, n), 1e-12);
    const auto one = spearman(x, y, Sidedness::one_sided);
    EXPECT_NEAR(one.p_value, r.p_value / 2, 1e-12);
    EXPECT_EQ(one.sided, Sidedness::one_sided);
  }
}

TEST(Spearman, OneSidedExact) {
  const auto two = spearman({1, 2, 3, 4, 5}, {2, 1, 4, 3, 5});
  const auto one = spearman({1, 2, 3, 4, 5}, {2, 1, 4, 3, 5}, Sidedness::one_sided);
  EXPECT_LT(one.p_value, two.p_value);
  EXPECT_GE(one.p_value, two.p_value / 2 - 1e-12);
}

TEST(SpearmanProperties, MonotoneTransformInvariance) {
  Gen gen(57);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + gen.below(30);
    const auto x = random_values(gen, n, trial % 2 ? 4 : 0);
    const auto y = random_values(gen, n);
    std::vector<double> fx, gy;
    for (double v : x) fx.push_back(std::exp(3 * v) - 7);
    for (double v : y) gy.push_back(v * v * v + 2 * v);
    try {
      const auto a = spearman(x, y);
      const auto b = spearman(fx, gy);
      EXPECT_NEAR(a.rho, b.rho, 1e-12);
      EXPECT_NEAR(a.p_value, b.p_value, 1e-12);
      EXPECT_LE(std::abs(a.rho), 1.0);
      EXPECT_GE(a.p_value, 0.0);
      EXPECT_LE(a.p_value, 1.0);
    } catch (const ConstantInputError&) {
    }
  }
}

TEST(SpearmanProperties, SelfAndReverse) {
  Gen gen(59);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + gen.below(20);
    const auto x = random_values(gen, n);
    EXPECT_NEAR(spearman(x, x).rho, 1, 1e-12);
    std::vector<double> rev;
    for (double v : x) rev.push_back(-v);
    EXPECT_NEAR(spearman(x, rev).rho, -1, 1e-12);
    auto tied = random_values(gen, n, 3);
    tied[0] = 0;
    tied[1] = 1;
    EXPECT_NEAR(spearman(tied, tied).rho, 1, 1e-12);
  }
}

TEST(SpearmanProperties, ExactAndTAgreeAtNine) {
  Gen gen(61);
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = random_values(gen, 9);
    const auto y = random_values(gen, 9);
    const auto r = spearman(x, y);
    ASSERT_EQ(r.method, PValueMethod::exact_permutation);
    worst = std::max(worst, std::abs(r.p_value - t_p_value(r.rho, 9)));
  }
  EXPECT_LE(worst, 0.05);
}

TEST(Histogram, Binning) {
  const auto h = histogram({0, 0.05, 0.5, 0.999, 1, 1}, 20);
  ASSERT_EQ(h.edges.size(), 21U);
  EXPECT_DOUBLE_EQ(h.edges.front(), 0);
  EXPECT_DOUBLE_EQ(h.edges.back(), 1);
  EXPECT_EQ(h.counts[0], 1U);
  EXPECT_EQ(h.counts[1], 1U);
  EXPECT_EQ(h.counts[10], 1U);
  EXPECT_EQ(h.counts[19], 3U);
  EXPECT_EQ(std::accumulate(h.counts.begin(), h.counts.end(), std::size_t{0}), 6U);
}

TEST(Summary, AllOnes) {
  std::vector<FractionSample> s;
  for (int k = 0; k < 5; ++k) s.push_back({"m" + std::to_string(k), "all", "A->B", 1.0});
  const auto sum = summarize_fractions(s);
  ASSERT_EQ(sum.orders.size(), 1U);
  const auto& o = sum.orders[0];
  EXPECT_EQ(o.hist.counts.back(), 5U);
  EXPECT_EQ(std::accumulate(o.hist.counts.begin(), o.hist.counts.end(), std::size_t{0}), 5U);
  EXPECT_DOUBLE_EQ(o.share_above, 1);
  EXPECT_DOUBLE_EQ(o.median, 1);
}

TEST(Summary, ShareAboveThreshold) {
  const auto sum = summarize_fractions({{"a", "all", "NS", 0.2}, {"b", "all", "NS", 0.8}});
  EXPECT_DOUBLE_EQ(sum.orders[0].share_above, 0.5);
  EXPECT_DOUBLE_EQ(sum.orders[0].median, 0.5);
  EXPECT_DOUBLE_EQ(sum.orders[0].min, 0.2);
  EXPECT_DOUBLE_EQ(sum.orders[0].max, 0.8);
  // Strictly above.
  EXPECT_DOUBLE_EQ(summarize_fractions({{"a", "all", "NS", 0.7}}).orders[0].share_above, 0);
}

TEST(Summary, GroupsSortedAndOrderInvariant) {
  Gen gen(67);
  std::vector<FractionSample> s;
  const char* orders[] = {"S->V", "V->S", "NS"};
  const char* groups[] = {"subject_verb", "verb_object"};
  for (int k = 0; k < 120; ++k) s.push_back({"m" + std::to_string(k), groups[k % 2], orders[k % 3], gen.unit()});
  const auto a = summarize_fractions(s);
  std::shuffle(s.begin(), s.end(), gen.engine());
  const auto b = summarize_fractions(s);
  EXPECT_EQ(to_json(a), to_json(b));
  ASSERT_EQ(a.orders.size(), 6U);
  for (std::size_t k = 1; k < a.orders.size(); ++k) {
    EXPECT_LE(std::tie(a.orders[k - 1].group, a.orders[k - 1].order), std::tie(a.orders[k].group, a.orders[k].order));
  }
}

TEST(Correlations, SyntheticPerfect) {
  std::vector<LabeledModel> models;
  for (int k = 0; k < 12; ++k) {
    const int noun = k % 3, verb = (k / 3) % 3;
    const double total = noun + verb;
    models.push_back({"sv" + std::to_string(k), "subject_verb", {{"S->V", total / 4}, {"NS", 0.1}}, noun, verb});
    models.push_back({"vo" + std::to_string(k), "verb_object", {{"O->V", 1 - total / 4}}, noun, verb});
  }
  const auto table = correlation_table(models);
  ASSERT_EQ(table.size(), 6U);
  EXPECT_EQ(table[0].name, "SV_vs_homonymous_total");
  EXPECT_EQ(table[1].name, "VO_vs_homonymous_total");
  EXPECT_EQ(table[2].name, "SV_vs_homonymous_verb");
  EXPECT_EQ(table[5].name, "VO_vs_homonymous_noun");
  ASSERT_TRUE(table[0].vs_homonymous);
  EXPECT_NEAR(table[0].vs_homonymous->rho, 1, 1e-12);
  EXPECT_NEAR(table[0].vs_polysemous->rho, -1, 1e-12);
  EXPECT_DOUBLE_EQ(table[0].vs_polysemous->p_value, table[0].vs_homonymous->p_value);
  EXPECT_NEAR(table[1].vs_homonymous->rho, -1, 1e-12);
  EXPECT_EQ(table[1].order, "O->V");
  EXPECT_EQ(table[0].x.size(), 12U);
}

TEST(Correlations, SmallGroupsGetNotes) {
  std::vector<LabeledModel> models{{"a", "subject_verb", {{"S->V", 1}}, 1, 1}, {"b", "subject_verb", {{"S->V", 0.9}}, 0, 1}};
  const auto table = correlation_table(models);
  EXPECT_FALSE(table[0].vs_homonymous);
  EXPECT_FALSE(table[0].note.empty());
  EXPECT_FALSE(table[1].vs_homonymous);
  std::vector<LabeledModel> constant;
  for (int k = 0; k < 4; ++k) constant.push_back({"c" + std::to_string(k), "subject_verb", {{"S->V", 0.1 * k}}, 1, 0});
  const auto t2 = correlation_table(constant);
  EXPECT_FALSE(t2[0].vs_homonymous);
  EXPECT_FALSE(t2[0].note.empty());
  std::vector<LabeledModel> unlabeled{{"u", "subject_verb", {{"S->V", 1}}, std::nullopt, std::nullopt}};
  EXPECT_THROW(correlation_table(unlabeled), MissingMetaError);
}

TEST(Plots, HistogramOnlyAndSharedAxes) {
  const auto dir = std::filesystem::temp_directory_path() / "caufrac_plots_test";
  std::filesystem::remove_all(dir);
  const auto sum = summarize_fractions(
      {{"a", "all", "A->B", 1}, {"b", "all", "A->B", 1}, {"c", "all", "A->B", 1}, {"a", "all", "NS", 0.3}});
  const auto manifest = emit_plots(sum, {}, dir / "plots", dir);
  std::vector<std::string> paths;
  for (const auto& e : manifest) paths.push_back(e["path"]);
  std::sort(paths.begin(), paths.end());
  EXPECT_EQ(paths, (std::vector<std::string>{"plots/histogram_all_A_to_B.csv", "plots/histogram_all_A_to_B.svg",
                                             "plots/histogram_all_NS.csv", "plots/histogram_all_NS.svg"}));
  // The NS bar (one model) is a third of the A->B bar on the shared y axis.
  const std::string full = slurp(dir / "plots" / "histogram_all_A_to_B.svg");
  const std::string third = slurp(dir / "plots" / "histogram_all_NS.svg");
  EXPECT_NE(full.find("height=\"244.00\""), std::string::npos);
  EXPECT_NE(third.find("height=\"81.33\""), std::string::npos);
  EXPECT_EQ(slurp(dir / "plots" / "histogram_all_NS.csv").substr(0, 25), "bin_lower,bin_upper,count");
  std::filesystem::remove_all(dir);
}

TEST(Format, DoublesAndTokens) {
  EXPECT_EQ(format_double(0.2), "0.2");
  EXPECT_EQ(format_double(1), "1");
  EXPECT_EQ(format_double(13.0 / 42.0), "0.30952380952380953");
  EXPECT_EQ(file_token("S->V"), "S_to_V");
  EXPECT_EQ(file_token("poset[A->C,B->C]"), "poset_A_to_C_B_to_C_");
}
