#include "lbsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace lbsim::stats {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate(const SampleGroups& data) {
  if (data.groups.size() < 2) {
    throw std::invalid_argument("sample groups: need at least two groups");
  }
  for (const auto& g : data.groups) {
    if (g.samples.empty()) {
      throw std::invalid_argument("sample groups: group '" + g.id +
                                  "' has no samples");
    }
    for (double x : g.samples) {
      if (!std::isfinite(x) || x < 0.0) {
        throw std::invalid_argument("sample groups: group '" + g.id +
                                    "' contains a non-finite or negative "
                                    "sample");
      }
    }
  }
}

void validate_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1)");
  }
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace

std::size_t SampleGroups::total_samples() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.samples.size();
  return n;
}

SampleGroups make_groups(const std::vector<std::vector<double>>& samples) {
  SampleGroups out;
  out.groups.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out.groups.push_back({"g" + std::to_string(i + 1), samples[i]});
  }
  return out;
}

double grand_mean(const SampleGroups& data) {
  validate(data);
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& g : data.groups) {
    for (double x : g.samples) sum += x;
    n += g.samples.size();
  }
  return sum / static_cast<double>(n);
}

SumSquares sum_squares(const SampleGroups& data) {
  validate(data);
  const double gm = grand_mean(data);
  SumSquares ss;
  for (const auto& g : data.groups) {
    const double gmean = mean_of(g.samples);
    ss.between += static_cast<double>(g.samples.size()) * (gmean - gm) *
                  (gmean - gm);
    for (double x : g.samples) {
      ss.total += (x - gm) * (x - gm);
      ss.within += (x - gmean) * (x - gmean);
    }
  }
  return ss;
}

AnovaReport f_test(const SampleGroups& data, double alpha) {
  validate(data);
  validate_alpha(alpha);
  const std::size_t k = data.group_count();
  const std::size_t n = data.total_samples();
  if (n < k + 1) {
    throw std::domain_error("f_test: within degrees of freedom N - k < 1");
  }

  AnovaReport r;
  r.grand_mean = grand_mean(data);
  const SumSquares ss = sum_squares(data);
  r.ss_t = ss.total;
  r.ss_b = ss.between;
  r.ss_w = ss.within;
  r.df_b = k - 1;
  r.df_w = n - k;
  r.ms_b = r.ss_b / static_cast<double>(r.df_b);
  r.ms_w = r.ss_w / static_cast<double>(r.df_w);
  r.f_critical = f_critical(alpha, r.df_b, r.df_w);
  if (r.ms_w > 0.0) {
    r.f_value = r.ms_b / r.ms_w;
  } else {
    // Zero within-group variation: either every sample is identical
    // (no signal, F = 0) or the groups are separated constants, where the
    // statistic diverges and the verdict is forced.
    r.f_value = (r.ss_b > 0.0) ? kInf : 0.0;
  }
  r.significant = r.f_value > r.f_critical;
  return r;
}

double t_test_pair(const std::vector<double>& g0,
                   const std::vector<double>& g1, double ms_w,
                   std::size_t df_w) {
  if (g0.empty() || g1.empty()) {
    throw std::invalid_argument("t_test_pair: empty group");
  }
  if (df_w < 1) {
    throw std::invalid_argument("t_test_pair: df_w must be >= 1");
  }
  if (ms_w < 0.0) {
    throw std::invalid_argument("t_test_pair: ms_w must be >= 0");
  }
  const double diff = std::fabs(mean_of(g0) - mean_of(g1));
  if (ms_w == 0.0) {
    return diff > 0.0 ? kInf : 0.0;
  }
  const double se =
      std::sqrt(ms_w * (1.0 / static_cast<double>(g0.size()) +
                        1.0 / static_cast<double>(g1.size())));
  return diff / se;
}

double lsd_threshold(double alpha, std::size_t df_w, double ms_w,
                     std::size_t n) {
  return lsd_threshold_unbalanced(alpha, df_w, ms_w, n, n);
}

double lsd_threshold_unbalanced(double alpha, std::size_t df_w, double ms_w,
                                std::size_t n_i, std::size_t n_j) {
  validate_alpha(alpha);
  if (df_w < 1) {
    throw std::invalid_argument("lsd_threshold: df_w must be >= 1");
  }
  if (n_i < 1 || n_j < 1) {
    throw std::invalid_argument("lsd_threshold: group sizes must be >= 1");
  }
  if (ms_w < 0.0) {
    throw std::invalid_argument("lsd_threshold: ms_w must be >= 0");
  }
  if (ms_w == 0.0) return 0.0;
  const double se =
      std::sqrt(ms_w * (1.0 / static_cast<double>(n_i) +
                        1.0 / static_cast<double>(n_j)));
  return t_critical(alpha, df_w) * se;
}

std::vector<PairComparison> multiple_comparisons(const SampleGroups& data,
                                                 double alpha) {
  const AnovaReport report = f_test(data, alpha);

  std::vector<std::size_t> order(data.groups.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return data.groups[a].id < data.groups[b].id;
  });

  std::vector<PairComparison> out;
  out.reserve(order.size() * (order.size() - 1) / 2);
  for (std::size_t a = 0; a < order.size(); ++a) {
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      const SampleGroup& gi = data.groups[order[a]];
      const SampleGroup& gj = data.groups[order[b]];
      PairComparison pc;
      pc.first = gi.id;
      pc.second = gj.id;
      pc.mean_diff = std::fabs(mean_of(gi.samples) - mean_of(gj.samples));
      pc.t_value =
          t_test_pair(gi.samples, gj.samples, report.ms_w, report.df_w);
      pc.lsd_threshold = lsd_threshold_unbalanced(
          alpha, report.df_w, report.ms_w, gi.samples.size(),
          gj.samples.size());
      pc.significant =
          pc.mean_diff >= pc.lsd_threshold && pc.mean_diff > 0.0;
      out.push_back(std::move(pc));
    }
  }
  return out;
}

// --------------------------------------------------------------------------
// Distribution critical values via the regularized incomplete beta function
// --------------------------------------------------------------------------

namespace {

// Continued-fraction evaluation (modified Lentz), convergent for
// x < (a + 1) / (a + b + 2); the complement identity covers the rest.
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

double beta_pdf_log(double a, double b, double x) {
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) -
         (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::invalid_argument("incomplete beta: a, b must be positive");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = a * std::log(x) + b * std::log1p(-x) -
                          (std::lgamma(a) + std::lgamma(b) -
                           std::lgamma(a + b));
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(a, b, x) / a;
  }
  return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) -
                        (std::lgamma(a) + std::lgamma(b) -
                         std::lgamma(a + b))) *
                   beta_cf(b, a, 1.0 - x) / b;
}

double inverse_incomplete_beta(double a, double b, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("inverse incomplete beta: p outside [0,1]");
  }
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;

  double lo = 0.0;
  double hi = 1.0;
  double x = 0.5;
  // Bisection gives a contraction-safe bracket; a few Newton steps at the
  // end restore full double precision.
  for (int i = 0; i < 80; ++i) {
    x = 0.5 * (lo + hi);
    if (regularized_incomplete_beta(a, b, x) < p) {
      lo = x;
    } else {
      hi = x;
    }
  }
  for (int i = 0; i < 8; ++i) {
    const double f = regularized_incomplete_beta(a, b, x) - p;
    const double dfdx = std::exp(beta_pdf_log(a, b, x));
    if (!(dfdx > 0.0)) break;
    double next = x - f / dfdx;
    if (next <= 0.0 || next >= 1.0) break;
    x = next;
  }
  return x;
}

double t_critical(double alpha, std::size_t df) {
  validate_alpha(alpha);
  if (df < 1) {
    throw std::invalid_argument("t_critical: df must be >= 1");
  }
  // Two-tailed: P(|T| > t) = alpha. With x = df / (df + t^2),
  // P(|T| > t) = I_x(df/2, 1/2), so invert at p = alpha.
  const double d = static_cast<double>(df);
  const double x = inverse_incomplete_beta(d / 2.0, 0.5, alpha);
  return std::sqrt(d * (1.0 - x) / x);
}

double f_critical(double alpha, std::size_t df1, std::size_t df2) {
  validate_alpha(alpha);
  if (df1 < 1 || df2 < 1) {
    throw std::invalid_argument("f_critical: degrees of freedom must be >= 1");
  }
  // Upper tail: P(F > f) = alpha. With x = d1*f / (d1*f + d2),
  // P(F <= f) = I_x(d1/2, d2/2), so invert at p = 1 - alpha.
  const double d1 = static_cast<double>(df1);
  const double d2 = static_cast<double>(df2);
  const double x = inverse_incomplete_beta(d1 / 2.0, d2 / 2.0, 1.0 - alpha);
  return d2 * x / (d1 * (1.0 - x));
}

}  // namespace lbsim::stats
