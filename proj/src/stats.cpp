#include "droplab/stats.hpp"

#include <algorithm>
#include <unsupported/Eigen/SpecialFunctions>

namespace droplab {

double chi_square_sf(double stat, double dof) {
  if (stat <= 0.0) {
    return 1.0;
  }
  return Eigen::numext::igammac(0.5 * dof, 0.5 * stat);
}

ChiSquareResult chi_square_gof(std::span<const std::int64_t> samples,
                               const std::function<double(std::int64_t)> &pmf,
                               double min_expected) {
  const double n = static_cast<double>(samples.size());
  std::map<std::int64_t, double> observed;
  for (auto s : samples) {
    observed[s] += 1.0;
  }
  auto observed_at_least = [&](std::int64_t k) {
    double c = 0.0;
    for (auto it = observed.lower_bound(k); it != observed.end(); ++it) {
      c += it->second;
    }
    return c;
  };

  std::vector<std::pair<double, double>> bins; // (observed, expected)
  double cdf = 0.0;
  double obs_acc = 0.0;
  double exp_acc = 0.0;
  std::int64_t k = 0;
  for (;; ++k) {
    const double tail_from_k = n * std::max(0.0, 1.0 - cdf);
    if (tail_from_k < min_expected) {
      // Everything from here on joins the open bin as the tail bin.
      obs_acc += observed_at_least(k);
      exp_acc += tail_from_k;
      bins.emplace_back(obs_acc, exp_acc);
      break;
    }
    const double pk = pmf(k);
    cdf += pk;
    auto it = observed.find(k);
    obs_acc += it == observed.end() ? 0.0 : it->second;
    exp_acc += n * pk;
    if (exp_acc >= min_expected && n * std::max(0.0, 1.0 - cdf) >= min_expected) {
      bins.emplace_back(obs_acc, exp_acc);
      obs_acc = 0.0;
      exp_acc = 0.0;
    }
  }
  // A short final bin is folded into its predecessor.
  if (bins.size() > 1 && bins.back().second < min_expected) {
    auto last = bins.back();
    bins.pop_back();
    bins.back().first += last.first;
    bins.back().second += last.second;
  }

  ChiSquareResult r;
  r.bins = static_cast<int>(bins.size());
  for (const auto &[o, e] : bins) {
    if (e > 0.0) {
      r.statistic += (o - e) * (o - e) / e;
    }
  }
  r.dof = std::max(1, r.bins - 1);
  r.p_value = chi_square_sf(r.statistic, r.dof);
  return r;
}

double kolmogorov_distance(std::span<const double> sorted,
                           const std::function<double(double)> &cdf) {
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    const double di = static_cast<double>(i);
    d = std::max({d, (di + 1.0) / n - f, f - di / n});
  }
  return d;
}

} // namespace droplab
