#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Core>

namespace droplab {

/// SplitMix64 finalizer. Used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Hashes a master seed together with a list of task coordinates.
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> keys);

/// Seeded random stream. All variates are generated by the routines in
/// this header so results do not depend on the standard library's
/// distribution implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for task `keys` under `master`.
  static Rng stream(std::uint64_t master,
                    std::initializer_list<std::uint64_t> keys) {
    return Rng(derive_seed(master, keys));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1).
  double uniform_open() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  bool bernoulli(double p) { return uniform() < p; }

private:
  std::mt19937_64 engine_;
};

/// Poisson variate. Sequential inversion below mean 10, PTRS
/// (transformed rejection with squeeze) above.
std::int64_t poisson(Rng &rng, double mean);

/// Binomial(trials, p) variate. Inversion when trials*min(p,1-p) < 10,
/// BTRS otherwise.
std::int64_t binomial(Rng &rng, std::int64_t trials, double p);

/// Exponential variate with the given rate (mean 1/rate).
double exponential(Rng &rng, double rate);

/// Index drawn from unnormalized non-negative weights.
int categorical(Rng &rng, const Eigen::Ref<const Eigen::VectorXd> &weights);

/// Multinomial(total, probs) via sequential conditional binomials.
Eigen::VectorXi multinomial(Rng &rng, std::int64_t total,
                            const Eigen::Ref<const Eigen::VectorXd> &probs);

} // namespace droplab
