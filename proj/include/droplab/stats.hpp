#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

namespace droplab {

/// Standard normal CDF. Evaluated through erfc so the lower tail keeps
/// full relative accuracy.
inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * M_SQRT1_2);
}

/// Dvoretzky-Kiefer-Wolfowitz half-width for an n-sample empirical CDF at
/// confidence 1 - alpha.
inline double dkw_slack(std::size_t n, double alpha = 0.001) {
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

/// Upper tail P[chi2_dof > stat].
double chi_square_sf(double stat, double dof);

struct ChiSquareResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  int bins = 0;
};

/// Goodness of fit of integer samples against a pmf on {0, 1, ...}.
/// Adjacent bins are pooled until every expected count is >= min_expected;
/// the upper tail is folded into the last bin.
ChiSquareResult chi_square_gof(std::span<const std::int64_t> samples,
                               const std::function<double(std::int64_t)> &pmf,
                               double min_expected = 5.0);

/// Two-sample chi-square homogeneity test over arbitrary discrete keys.
/// Categories whose pooled count is below min_expected are merged into one
/// overflow bin.
template <typename Key>
ChiSquareResult chi_square_two_sample(const std::map<Key, std::int64_t> &a,
                                      const std::map<Key, std::int64_t> &b,
                                      double min_expected = 5.0);

/// Poisson pmf evaluated in log space.
inline double poisson_pmf(std::int64_t k, double mean) {
  if (k < 0) {
    return 0.0;
  }
  if (mean == 0.0) {
    return k == 0 ? 1.0 : 0.0;
  }
  const double kd = static_cast<double>(k);
  return std::exp(kd * std::log(mean) - mean - std::lgamma(kd + 1.0));
}

/// One-sample Kolmogorov distance sup_x |F_n(x) - F(x)|. `sorted` must be
/// ascending; both one-sided gaps are checked at every sample.
double kolmogorov_distance(std::span<const double> sorted,
                           const std::function<double(double)> &cdf);

/// Mean with its standard error.
struct Estimate {
  double mean = 0.0;
  double se = 0.0;
};

/// Binomial proportion estimate from `hits` successes in `n` trials.
inline Estimate proportion(std::int64_t hits, std::int64_t n) {
  if (n <= 0) {
    return {};
  }
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n))};
}

// -- template implementation ------------------------------------------------

template <typename Key>
ChiSquareResult chi_square_two_sample(const std::map<Key, std::int64_t> &a,
                                      const std::map<Key, std::int64_t> &b,
                                      double min_expected) {
  double na = 0.0;
  double nb = 0.0;
  for (const auto &[k, c] : a) {
    na += static_cast<double>(c);
  }
  for (const auto &[k, c] : b) {
    nb += static_cast<double>(c);
  }
  const double total = na + nb;
  std::map<Key, std::pair<double, double>> joint;
  for (const auto &[k, c] : a) {
    joint[k].first += static_cast<double>(c);
  }
  for (const auto &[k, c] : b) {
    joint[k].second += static_cast<double>(c);
  }
  std::vector<std::pair<double, double>> cells;
  std::pair<double, double> overflow{0.0, 0.0};
  for (const auto &[k, ab] : joint) {
    const double pooled = ab.first + ab.second;
    const double expected_min = pooled * std::min(na, nb) / total;
    if (expected_min < min_expected) {
      overflow.first += ab.first;
      overflow.second += ab.second;
    } else {
      cells.push_back(ab);
    }
  }
  if (overflow.first + overflow.second > 0.0) {
    cells.push_back(overflow);
  }
  ChiSquareResult r;
  r.bins = static_cast<int>(cells.size());
  for (const auto &[ca, cb] : cells) {
    const double pooled = ca + cb;
    const double ea = pooled * na / total;
    const double eb = pooled * nb / total;
    if (ea > 0.0) {
      r.statistic += (ca - ea) * (ca - ea) / ea;
    }
    if (eb > 0.0) {
      r.statistic += (cb - eb) * (cb - eb) / eb;
    }
  }
  r.dof = std::max(1, r.bins - 1);
  r.p_value = chi_square_sf(r.statistic, r.dof);
  return r;
}

} // namespace droplab
