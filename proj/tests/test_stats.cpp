#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "lbsim/rng.hpp"
#include "lbsim/stats.hpp"
#include "oracles.hpp"

using lbsim::Rng;
using namespace lbsim::stats;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SampleGroups g(const std::vector<std::vector<double>>& xs) {
  return make_groups(xs);
}

// Deterministic random instance: k groups of n_i samples in [0, 100).
oracle::Groups random_instance(Rng& rng, std::size_t min_k = 2,
                               std::size_t max_k = 6, std::size_t min_n = 2,
                               std::size_t max_n = 20) {
  const std::size_t k =
      min_k + static_cast<std::size_t>(rng.uniform01() * (max_k - min_k + 1));
  oracle::Groups out(k);
  for (auto& grp : out) {
    const std::size_t n = min_n + static_cast<std::size_t>(
                                      rng.uniform01() * (max_n - min_n + 1));
    grp.resize(n);
    for (double& x : grp) x = rng.uniform01() * 100.0;
  }
  return out;
}

}  // namespace

TEST_CASE("grand mean pools every sample") {
  CHECK(grand_mean(g({{1, 2, 3}, {2, 3, 4}})) == doctest::Approx(2.5));
  CHECK(grand_mean(g({{5, 5}, {5, 5}})) == doctest::Approx(5.0));
  CHECK(grand_mean(g({{0}, {0}, {0}})) == doctest::Approx(0.0));
}

TEST_CASE("grand mean rejects malformed input") {
  CHECK_THROWS_AS(grand_mean(g({{1, 2, 3}})), std::invalid_argument);
  CHECK_THROWS_AS(grand_mean(g({{1, 2}, {}})), std::invalid_argument);
  CHECK_THROWS_AS(grand_mean(g({{1, 2}, {-1, 2}})), std::invalid_argument);
  CHECK_THROWS_AS(grand_mean(g({{1, 2}, {kInf, 2}})), std::invalid_argument);
}

TEST_CASE("sum of squares from definitions") {
  const SumSquares ss = sum_squares(g({{1, 2, 3}, {2, 3, 4}}));
  CHECK(ss.total == doctest::Approx(5.5));
  CHECK(ss.between == doctest::Approx(1.5));
  CHECK(ss.within == doctest::Approx(4.0));

  const SumSquares flat = sum_squares(g({{7, 7}, {7, 7}}));
  CHECK(flat.total == doctest::Approx(0.0));
  CHECK(flat.between == doctest::Approx(0.0));
  CHECK(flat.within == doctest::Approx(0.0));

  const SumSquares sep = sum_squares(g({{1, 1}, {3, 3}}));
  CHECK(sep.total == doctest::Approx(4.0));
  CHECK(sep.between == doctest::Approx(4.0));
  CHECK(sep.within == doctest::Approx(0.0));
}

TEST_CASE("sum of squares decomposition holds on randomized instances") {
  Rng rng(7, "ss-decomposition");
  for (int trial = 0; trial < 1000; ++trial) {
    const auto inst = random_instance(rng);
    const SumSquares ss = sum_squares(g(inst));
    CHECK(std::fabs(ss.total - (ss.between + ss.within)) <=
          1e-9 * std::max(1.0, ss.total));
    // Cross-check each component against the independent loops.
    CHECK(ss.total == doctest::Approx(oracle::ss_total(inst)).epsilon(1e-12));
    CHECK(ss.between ==
          doctest::Approx(oracle::ss_between(inst)).epsilon(1e-12));
    CHECK(ss.within ==
          doctest::Approx(oracle::ss_within(inst)).epsilon(1e-12));
  }
}

TEST_CASE("shift invariance and scale covariance") {
  Rng rng(11, "shift-scale");
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = random_instance(rng);
    const double shift = rng.uniform01() * 50.0;
    const double scale = 0.5 + rng.uniform01() * 4.0;

    auto shifted = inst;
    auto scaled = inst;
    for (auto& grp : shifted)
      for (double& x : grp) x += shift;
    for (auto& grp : scaled)
      for (double& x : grp) x *= scale;

    const AnovaReport base = f_test(g(inst), 0.05);
    const AnovaReport sh = f_test(g(shifted), 0.05);
    const AnovaReport sc = f_test(g(scaled), 0.05);

    CHECK(sh.ss_b == doctest::Approx(base.ss_b).epsilon(1e-9));
    CHECK(sh.ss_w == doctest::Approx(base.ss_w).epsilon(1e-9));
    CHECK(sh.f_value == doctest::Approx(base.f_value).epsilon(1e-9));

    const double s2 = scale * scale;
    CHECK(sc.ss_t == doctest::Approx(base.ss_t * s2).epsilon(1e-9));
    CHECK(sc.ss_b == doctest::Approx(base.ss_b * s2).epsilon(1e-9));
    CHECK(sc.ss_w == doctest::Approx(base.ss_w * s2).epsilon(1e-9));
    CHECK(sc.f_value == doctest::Approx(base.f_value).epsilon(1e-9));
  }
}

TEST_CASE("f test on the two-group instance") {
  const AnovaReport r = f_test(g({{1, 2, 3}, {2, 3, 4}}), 0.05);
  CHECK(r.f_value == doctest::Approx(1.5));
  CHECK(r.df_b == 1);
  CHECK(r.df_w == 4);
  CHECK(r.ms_b == doctest::Approx(1.5));
  CHECK(r.ms_w == doctest::Approx(1.0));
  CHECK(std::fabs(r.f_critical - 7.7086) < 1e-2);
  CHECK_FALSE(r.significant);
}

TEST_CASE("f test degenerate branches") {
  const AnovaReport flat = f_test(g({{5, 5}, {5, 5}}), 0.05);
  CHECK(flat.f_value == doctest::Approx(0.0));
  CHECK_FALSE(flat.significant);

  const AnovaReport sep = f_test(g({{1, 1, 1}, {9, 9, 9}}), 0.05);
  CHECK(std::isinf(sep.f_value));
  CHECK(sep.f_value > 0.0);
  CHECK(sep.significant);
}

TEST_CASE("f test input validation") {
  CHECK_THROWS_AS(f_test(g({{1}, {2}}), 0.05), std::domain_error);
  CHECK_THROWS_AS(f_test(g({{1, 2}, {3, 4}}), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(f_test(g({{1, 2}, {3, 4}}), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(f_test(g({{1, 2}, {3, 4}}), 1.5), std::invalid_argument);
}

TEST_CASE("report invariants on randomized instances") {
  Rng rng(13, "report-invariants");
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = random_instance(rng);
    const AnovaReport r = f_test(g(inst), 0.05);
    std::size_t n = 0;
    for (const auto& grp : inst) n += grp.size();
    CHECK(r.df_b == inst.size() - 1);
    CHECK(r.df_w == n - inst.size());
    if (r.ms_w > 0.0) {
      CHECK(r.f_value == doctest::Approx(r.ms_b / r.ms_w).epsilon(1e-12));
    }
    CHECK(r.significant == (r.f_value > r.f_critical));
  }
}

TEST_CASE("pooled t statistic") {
  CHECK(t_test_pair({1, 2, 3}, {2, 3, 4}, 1.0, 4) ==
        doctest::Approx(1.0 / std::sqrt(2.0 / 3.0)));
  CHECK(std::fabs(t_test_pair({1, 2, 3}, {2, 3, 4}, 1.0, 4) - 1.2247) < 1e-3);
  CHECK(t_test_pair({4, 4}, {4, 4}, 1.0, 2) == doctest::Approx(0.0));
  CHECK(t_test_pair({1, 1}, {1, 1}, 0.0, 2) == doctest::Approx(0.0));
  CHECK(std::isinf(t_test_pair({0, 0}, {4, 4}, 0.0, 2)));
}

TEST_CASE("lsd threshold values") {
  CHECK(std::fabs(lsd_threshold(0.05, 4, 1.0, 3) - 2.2665) < 1e-3);
  CHECK(std::fabs(lsd_threshold(0.05, 10, 2.0, 5) -
                  2.2281 * std::sqrt(0.8)) < 1e-3);
  CHECK(lsd_threshold(0.05, 4, 0.0, 3) == doctest::Approx(0.0));
  // Balanced formula is the n_i == n_j special case of the unbalanced one.
  CHECK(lsd_threshold(0.05, 8, 2.5, 4) ==
        doctest::Approx(lsd_threshold_unbalanced(0.05, 8, 2.5, 4, 4)));
  CHECK_THROWS_AS(lsd_threshold(1.5, 4, 1.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(lsd_threshold(0.05, 0, 1.0, 3), std::invalid_argument);
}

TEST_CASE("pairwise comparisons compose the t and threshold rules") {
  const auto single = multiple_comparisons(g({{1, 2, 3}, {2, 3, 4}}), 0.05);
  REQUIRE(single.size() == 1);
  CHECK(single[0].mean_diff == doctest::Approx(1.0));
  CHECK(single[0].lsd_threshold == doctest::Approx(2.26695).epsilon(1e-3));
  CHECK_FALSE(single[0].significant);

  const auto flat =
      multiple_comparisons(g({{2, 2}, {2, 2}, {2, 2}}), 0.05);
  REQUIRE(flat.size() == 3);
  for (const auto& pc : flat) {
    CHECK(pc.mean_diff == doctest::Approx(0.0));
    CHECK_FALSE(pc.significant);
  }

  const auto split =
      multiple_comparisons(g({{1, 1, 1}, {1, 1, 1}, {10, 10, 10}}), 0.05);
  REQUIRE(split.size() == 3);
  for (const auto& pc : split) {
    const bool involves_g3 = pc.first == "g3" || pc.second == "g3";
    CHECK(pc.significant == involves_g3);
  }
}

TEST_CASE("pairwise comparisons are ordered and symmetric") {
  const std::vector<std::vector<double>> xs = {
      {5, 6, 7}, {1, 2, 3}, {9, 9, 8}};
  const auto fwd = multiple_comparisons(g(xs), 0.05);
  REQUIRE(fwd.size() == 3);
  CHECK(fwd[0].first == "g1");
  CHECK(fwd[0].second == "g2");
  CHECK(fwd[1].first == "g1");
  CHECK(fwd[1].second == "g3");
  CHECK(fwd[2].first == "g2");
  CHECK(fwd[2].second == "g3");

  // Feeding the groups in reverse order must produce the same verdict for
  // every pair (ids keep their samples; only input order changes).
  SampleGroups rev;
  rev.groups = {{"g3", xs[2]}, {"g2", xs[1]}, {"g1", xs[0]}};
  const auto back = multiple_comparisons(rev, 0.05);
  REQUIRE(back.size() == fwd.size());
  for (std::size_t i = 0; i < fwd.size(); ++i) {
    CHECK(back[i].first == fwd[i].first);
    CHECK(back[i].second == fwd[i].second);
    CHECK(back[i].mean_diff == doctest::Approx(fwd[i].mean_diff));
    CHECK(back[i].significant == fwd[i].significant);
  }
}

TEST_CASE("t critical values match published tables") {
  CHECK(std::fabs(t_critical(0.05, 1) - 12.7062) < 1e-3);
  CHECK(std::fabs(t_critical(0.05, 2) - 4.3027) < 1e-3);
  CHECK(std::fabs(t_critical(0.05, 4) - 2.7764) < 1e-3);
  CHECK(std::fabs(t_critical(0.05, 10) - 2.2281) < 1e-3);
  CHECK(std::fabs(t_critical(0.05, 30) - 2.0423) < 1e-3);
  CHECK(std::fabs(t_critical(0.05, 120) - 1.9799) < 1e-3);
  CHECK(std::fabs(t_critical(0.05, 100000) - 1.9600) < 1e-3);

  double prev = t_critical(0.05, 1);
  for (std::size_t df = 2; df <= 200; ++df) {
    const double cur = t_critical(0.05, df);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("f critical is the square of t critical at one numerator df") {
  CHECK(std::fabs(f_critical(0.05, 1, 4) - 7.7086) < 1e-2);
  for (std::size_t d = 1; d <= 100; ++d) {
    const double f = f_critical(0.05, 1, d);
    const double t = t_critical(0.05, d);
    CHECK(std::fabs(f - t * t) <= 1e-6 * std::max(1.0, f));
  }
}

TEST_CASE("incomplete beta identities") {
  Rng rng(17, "ibeta");
  for (int trial = 0; trial < 100; ++trial) {
    const double a = 0.5 + rng.uniform01() * 20.0;
    const double b = 0.5 + rng.uniform01() * 20.0;
    const double x = rng.uniform01();
    const double lhs = regularized_incomplete_beta(a, b, x);
    const double rhs = 1.0 - regularized_incomplete_beta(b, a, 1.0 - x);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    const double p = 0.01 + rng.uniform01() * 0.98;
    const double xin = inverse_incomplete_beta(a, b, p);
    CHECK(regularized_incomplete_beta(a, b, xin) ==
          doctest::Approx(p).epsilon(1e-9));
  }
}

TEST_CASE("statistics agree with the brute-force reference") {
  Rng rng(19, "oracle-equivalence");
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = random_instance(rng);
    const AnovaReport r = f_test(g(inst), 0.05);
    const auto truth = oracle::f_statistic(inst);
    CHECK(std::fabs(r.f_value - truth.f) <=
          1e-9 * std::max(1.0, std::fabs(truth.f)));

    const auto mine = multiple_comparisons(g(inst), 0.05);
    const auto ref = oracle::lsd_pairs(inst, 0.05, [](double a, std::size_t d) {
      return t_critical(a, d);
    });
    REQUIRE(mine.size() == ref.size());
    for (std::size_t p = 0; p < ref.size(); ++p) {
      CHECK(std::fabs(mine[p].mean_diff - ref[p].mean_diff) <=
            1e-9 * std::max(1.0, ref[p].mean_diff));
      CHECK(std::fabs(mine[p].lsd_threshold - ref[p].threshold) <=
            1e-9 * std::max(1.0, ref[p].threshold));
      const double t_ref =
          oracle::pooled_t(inst[ref[p].i], inst[ref[p].j], truth.ms_w);
      CHECK(std::fabs(mine[p].t_value - t_ref) <=
            1e-9 * std::max(1.0, t_ref));
      CHECK(mine[p].significant == ref[p].significant);
    }
  }
}
