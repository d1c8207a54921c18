#pragma once

// Brute-force reference implementations used only by the test suites.
// Everything here is written straight from the defining formulas with
// plain loops, deliberately sharing no code with the library under test.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace oracle {

using Groups = std::vector<std::vector<double>>;

inline double grand_mean(const Groups& gs) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& g : gs) {
    for (double x : g) sum += x;
    n += g.size();
  }
  return sum / static_cast<double>(n);
}

inline double group_mean(const std::vector<double>& g) {
  double s = 0.0;
  for (double x : g) s += x;
  return s / static_cast<double>(g.size());
}

// Each sum computed from its own definition; no subtraction shortcuts.
inline double ss_total(const Groups& gs) {
  const double gm = grand_mean(gs);
  double ss = 0.0;
  for (const auto& g : gs)
    for (double x : g) ss += (x - gm) * (x - gm);
  return ss;
}

inline double ss_between(const Groups& gs) {
  const double gm = grand_mean(gs);
  double ss = 0.0;
  for (const auto& g : gs) {
    const double m = group_mean(g);
    ss += static_cast<double>(g.size()) * (m - gm) * (m - gm);
  }
  return ss;
}

inline double ss_within(const Groups& gs) {
  double ss = 0.0;
  for (const auto& g : gs) {
    const double m = group_mean(g);
    for (double x : g) ss += (x - m) * (x - m);
  }
  return ss;
}

struct FResult {
  double ms_b;
  double ms_w;
  double f;
};

inline FResult f_statistic(const Groups& gs) {
  std::size_t n = 0;
  for (const auto& g : gs) n += g.size();
  const std::size_t k = gs.size();
  const double ms_b = ss_between(gs) / static_cast<double>(k - 1);
  const double ms_w = ss_within(gs) / static_cast<double>(n - k);
  double f;
  if (ms_w > 0.0) {
    f = ms_b / ms_w;
  } else {
    f = ms_b > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  return {ms_b, ms_w, f};
}

inline double pooled_t(const std::vector<double>& a,
                       const std::vector<double>& b, double ms_w) {
  const double diff = std::fabs(group_mean(a) - group_mean(b));
  if (ms_w == 0.0) {
    return diff > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  return diff / std::sqrt(ms_w * (1.0 / static_cast<double>(a.size()) +
                                  1.0 / static_cast<double>(b.size())));
}

struct LsdVerdict {
  std::size_t i;
  std::size_t j;
  double mean_diff;
  double threshold;
  bool significant;
};

// Pairwise least-significant-difference sweep. The t critical value is
// injected so this oracle stays independent of how it is computed; the
// caller validates that function against published tables separately.
inline std::vector<LsdVerdict> lsd_pairs(
    const Groups& gs, double alpha,
    const std::function<double(double, std::size_t)>& t_crit) {
  std::size_t n = 0;
  for (const auto& g : gs) n += g.size();
  const std::size_t k = gs.size();
  const std::size_t df_w = n - k;
  const double ms_w = ss_within(gs) / static_cast<double>(df_w);

  std::vector<LsdVerdict> out;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double diff =
          std::fabs(group_mean(gs[i]) - group_mean(gs[j]));
      double threshold = 0.0;
      if (ms_w > 0.0) {
        threshold = t_crit(alpha, df_w) *
                    std::sqrt(ms_w * (1.0 / static_cast<double>(gs[i].size()) +
                                      1.0 / static_cast<double>(gs[j].size())));
      }
      out.push_back({i, j, diff, threshold,
                     diff >= threshold && diff > 0.0});
    }
  }
  return out;
}

}  // namespace oracle
