#include "droplab/random.hpp"

#include <cmath>
#include <stdexcept>

namespace droplab {

std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = mix64(master);
  for (auto k : keys) {
    h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
  }
  return h;
}

namespace {

std::int64_t poisson_inversion(Rng &rng, double mean) {
  const double u = rng.uniform();
  double p = std::exp(-mean);
  double cdf = p;
  std::int64_t k = 0;
  while (u > cdf) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
    // cdf can stall just below 1 from rounding; the remaining mass is
    // far below 2^-53 by then.
    if (p < 1e-300 && k > mean) {
      break;
    }
  }
  return k;
}

// Hormann (1993), "The transformed rejection method for generating
// Poisson random variables".
std::int64_t poisson_ptrs(Rng &rng, double mean) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform_open();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) {
      return static_cast<std::int64_t>(k);
    }
    if (k < 0.0 || (us < 0.013 && v > us)) {
      continue;
    }
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -mean + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<std::int64_t>(k);
    }
  }
}

std::int64_t binomial_inversion(Rng &rng, std::int64_t n, double p) {
  const double q = 1.0 - p;
  const double s = p / q;
  const double a = static_cast<double>(n + 1) * s;
  for (;;) {
    double r = std::pow(q, static_cast<double>(n));
    double u = rng.uniform();
    std::int64_t x = 0;
    while (u > r) {
      u -= r;
      ++x;
      if (x > n) {
        break;
      }
      r *= a / static_cast<double>(x) - s;
    }
    if (x <= n) {
      return x;
    }
  }
}

// Hormann (1993), "The generation of binomial random variates". Requires
// p <= 0.5.
std::int64_t binomial_btrs(Rng &rng, std::int64_t n, double p) {
  const double nd = static_cast<double>(n);
  const double q = 1.0 - p;
  const double spq = std::sqrt(nd * p * q);
  const double b = 1.15 + 2.53 * spq;
  const double a = -0.0873 + 0.0248 * b + 0.01 * p;
  const double c = nd * p + 0.5;
  const double vr = 0.92 - 4.2 / b;
  const double alpha = (2.83 + 5.1 / b) * spq;
  const double lpq = std::log(p / q);
  const double m = std::floor((nd + 1.0) * p);
  const double h = std::lgamma(m + 1.0) + std::lgamma(nd - m + 1.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    double v = rng.uniform_open();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + c);
    if (k < 0.0 || k > nd) {
      continue;
    }
    if (us >= 0.07 && v <= vr) {
      return static_cast<std::int64_t>(k);
    }
    v = std::log(v * alpha / (a / (us * us) + b));
    if (v <= h - std::lgamma(k + 1.0) - std::lgamma(nd - k + 1.0) +
                 (k - m) * lpq) {
      return static_cast<std::int64_t>(k);
    }
  }
}

} // namespace

std::int64_t poisson(Rng &rng, double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw std::invalid_argument("poisson: mean must be finite and >= 0");
  }
  if (mean == 0.0) {
    return 0;
  }
  return mean < 10.0 ? poisson_inversion(rng, mean) : poisson_ptrs(rng, mean);
}

std::int64_t binomial(Rng &rng, std::int64_t trials, double p) {
  if (trials < 0 || !(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("binomial: need trials >= 0, p in [0,1]");
  }
  if (trials == 0 || p == 0.0) {
    return 0;
  }
  if (p == 1.0) {
    return trials;
  }
  if (p > 0.5) {
    return trials - binomial(rng, trials, 1.0 - p);
  }
  if (static_cast<double>(trials) * p < 10.0) {
    return binomial_inversion(rng, trials, p);
  }
  return binomial_btrs(rng, trials, p);
}

double exponential(Rng &rng, double rate) {
  if (!(rate > 0.0)) {
    throw std::invalid_argument("exponential: rate must be > 0");
  }
  return -std::log(rng.uniform_open()) / rate;
}

int categorical(Rng &rng, const Eigen::Ref<const Eigen::VectorXd> &weights) {
  const double total = weights.sum();
  if (!(total > 0.0)) {
    throw std::invalid_argument("categorical: weights must have positive sum");
  }
  const double u = rng.uniform() * total;
  double acc = 0.0;
  int last = -1;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) {
      continue;
    }
    acc += weights[i];
    last = static_cast<int>(i);
    if (u < acc) {
      return last;
    }
  }
  return last;
}

Eigen::VectorXi multinomial(Rng &rng, std::int64_t total,
                            const Eigen::Ref<const Eigen::VectorXd> &probs) {
  Eigen::VectorXi out = Eigen::VectorXi::Zero(probs.size());
  double remaining_mass = probs.sum();
  std::int64_t remaining = total;
  Eigen::Index last = probs.size() - 1;
  while (last > 0 && probs[last] <= 0.0) {
    --last;
  }
  for (Eigen::Index j = 0; j < probs.size() && remaining > 0; ++j) {
    if (probs[j] <= 0.0) {
      continue;
    }
    if (j == last) {
      out[j] = static_cast<int>(remaining);
      break;
    }
    const double p = remaining_mass > 0.0
                         ? std::min(1.0, probs[j] / remaining_mass)
                         : 1.0;
    const std::int64_t draw = binomial(rng, remaining, p);
    out[j] = static_cast<int>(draw);
    remaining -= draw;
    remaining_mass -= probs[j];
  }
  return out;
}

} // namespace droplab
