#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace lbsim::stats {

// One group of traffic observations: a server's monitoring window.
// Samples are bytes observed per monitoring interval.
struct SampleGroup {
  std::string id;
  std::vector<double> samples;
};

// The input to the one-way analysis of variance: k >= 2 groups, each with
// n_i >= 1 finite, non-negative samples.
struct SampleGroups {
  std::vector<SampleGroup> groups;

  std::size_t group_count() const { return groups.size(); }
  std::size_t total_samples() const;
};

// Convenience builder for tests and call sites that do not care about ids:
// groups are named g1, g2, ... in order.
SampleGroups make_groups(const std::vector<std::vector<double>>& samples);

// Decomposition of total variation into between-group and within-group
// components; total = between + within up to rounding.
struct SumSquares {
  double total = 0.0;
  double between = 0.0;
  double within = 0.0;
};

// Full one-way ANOVA result. When the within-group variation is exactly
// zero while group means differ, f_value is +infinity and significant is
// true (reachable during simulation warm-up, so it is a sentinel rather
// than an error).
struct AnovaReport {
  double grand_mean = 0.0;
  double ss_t = 0.0;
  double ss_b = 0.0;
  double ss_w = 0.0;
  std::size_t df_b = 0;
  std::size_t df_w = 0;
  double ms_b = 0.0;
  double ms_w = 0.0;
  double f_value = 0.0;
  double f_critical = 0.0;
  bool significant = false;
};

// Pairwise least-significant-difference verdict for one unordered pair of
// groups. `first` and `second` are group ids with first < second in the
// canonical (lexicographic) order.
struct PairComparison {
  std::string first;
  std::string second;
  double mean_diff = 0.0;      // |mean(first) - mean(second)|
  double t_value = 0.0;
  double lsd_threshold = 0.0;  // D_alpha for this pair
  bool significant = false;
};

// Mean over every sample in every group. Throws std::invalid_argument when
// the input has fewer than two groups, an empty group, or any non-finite
// or negative sample.
double grand_mean(const SampleGroups& data);

// Total / between-group / within-group sums of squares, each computed from
// its own definition (not by subtraction). Same validation as grand_mean.
SumSquares sum_squares(const SampleGroups& data);

// One-way ANOVA with df_b = k - 1 and df_w = N - k. Throws
// std::invalid_argument on invalid data or alpha outside (0,1), and
// std::domain_error when N - k < 1.
AnovaReport f_test(const SampleGroups& data, double alpha);

// Pooled two-sample t statistic |mean0 - mean1| / sqrt(ms_w*(1/n0 + 1/n1)).
// With ms_w = 0 the statistic degenerates: +infinity when the means differ,
// 0 when they are equal. df_w is validated (>= 1) but otherwise only gives
// the statistic its distribution, which callers consult separately.
double t_test_pair(const std::vector<double>& g0,
                   const std::vector<double>& g1, double ms_w,
                   std::size_t df_w);

// Balanced least-significant-difference threshold
// D_alpha = t_crit(alpha, df_w) * sqrt(2 * ms_w / n).
double lsd_threshold(double alpha, std::size_t df_w, double ms_w,
                     std::size_t n);

// Unbalanced form sqrt(ms_w * (1/n_i + 1/n_j)); reduces to the balanced
// form when n_i == n_j.
double lsd_threshold_unbalanced(double alpha, std::size_t df_w, double ms_w,
                                std::size_t n_i, std::size_t n_j);

// Every unordered pair of groups compared against the LSD threshold,
// ordered lexicographically by (first, second) group id. A pair is
// significant when its mean difference reaches the threshold and the means
// actually differ (the second clause only matters in the degenerate
// zero-variance case, where the threshold collapses to zero).
std::vector<PairComparison> multiple_comparisons(const SampleGroups& data,
                                                 double alpha);

// Two-tailed Student-t critical value at significance alpha.
double t_critical(double alpha, std::size_t df);

// Upper-tail F critical value at significance alpha.
double f_critical(double alpha, std::size_t df1, std::size_t df2);

// Numeric kernels behind the critical values; exposed for direct testing.
// Regularized incomplete beta I_x(a, b) via the Lentz continued fraction,
// and its inverse in x by bisection with a Newton polish.
double regularized_incomplete_beta(double a, double b, double x);
double inverse_incomplete_beta(double a, double b, double p);

}  // namespace lbsim::stats
