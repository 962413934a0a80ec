#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "droplab/classifiers.hpp"
#include "droplab/theory.hpp"
#include "droplab/topic_model.hpp"

namespace droplab {

// -- learning curves ---------------------------------------------------------

/// Grid of (n, delta, trial) cells. delta = 1 trains naive Bayes; every
/// other delta trains logistic regression with binomial dropout.
struct CurveSpec {
  explicit CurveSpec(GenerativeSampler s) : sampler(std::move(s)) {}

  GenerativeSampler sampler;
  std::vector<int> n_grid{100, 300, 1000, 3000, 10000};
  std::vector<double> delta_grid{0.0, 0.5, 0.75, 0.9, 0.95, 1.0};
  int trials = 10;
  std::int64_t test_size = 100000;
  TrainConfig train_cfg;
  double nb_smoothing = 1.0;
  std::uint64_t master_seed = 0;
  /// Store measured training time; otherwise wall_time_ms is 0 so that
  /// outputs are byte-reproducible.
  bool record_time = false;

  void validate() const;
};

struct CurveRecord {
  int n = 0;
  double delta = 0.0;
  int trial = 0;
  double test_error = 0.0;
  double train_error = 0.0;
  double wall_time_ms = 0.0;
  std::uint64_t seed = 0;
  /// Non-empty when training failed; errors are then NaN.
  std::string failure;
};

struct CurveCell {
  int n = 0;
  double delta = 0.0;
  std::size_t count = 0;
  Estimate test_error;
  Estimate train_error;
};

struct CurveResult {
  std::vector<CurveRecord> records;

  /// Mean +- standard error per (n, delta), in grid order. Failed records
  /// are skipped.
  std::vector<CurveCell> summary() const;
};

/// Per-cell seed: hash of (master seed, n, delta index, trial).
std::uint64_t cell_seed(std::uint64_t master, int n, std::size_t delta_index,
                        int trial);

/// Trains every cell on a fresh sample, recalibrates the intercept on the
/// training set and scores it on the trial's shared test set. Records are
/// ordered (trial, n, delta) and do not depend on `threads`.
CurveResult run_learning_curves(const CurveSpec &spec, int threads = 1);

/// CSV with a leading '#' provenance line followed by the fixed header
/// n,delta,trial,test_error,train_error,wall_time_ms,seed.
std::string curves_csv(const CurveResult &result, const std::string &provenance);

// -- influence demo ----------------------------------------------------------

/// Two-word model: class 1 is a mixture of a common topic far from class 0
/// and a rare topic close to it; class 0 has a single topic. All topics
/// share one expected length so the Bayes boundary is thinning-invariant.
struct InfluenceConfig {
  double delta = 0.75;
  int n = 10000;
  std::uint64_t seed = 0;
  double doc_length = 30.0;
  double blue_word1 = 0.3;         ///< class-0 share of word 1
  double common_red_word1 = 0.9;   ///< frequent class-1 topic
  double rare_red_word1 = 0.5;     ///< infrequent class-1 topic
  double rare_fraction = 0.01;     ///< 99:1 mixture
  TrainConfig train = default_train();

  static TrainConfig default_train() {
    TrainConfig cfg;
    cfg.fit_intercept = true;
    cfg.epochs = 1000;
    cfg.dropout.mc_replicates = 4;
    return cfg;
  }
  TopicModel model() const;
};

struct ClusterErrors {
  double blue = 0.0;
  double common_red = 0.0;
  double rare_red = 0.0;
};

struct InfluenceReport {
  LinearClassifier plain;
  LinearClassifier dropout;
  /// Angle between the two decision-line normals, degrees.
  double normal_angle_deg = 0.0;
  ClusterErrors plain_errors;
  ClusterErrors dropout_errors;
  /// Largest |P(y=1 | x~=v) - P(y=1 | x=v)| over v with sum v <= 30.
  double posterior_field_gap = 0.0;
};

InfluenceReport run_influence_demo(const InfluenceConfig &cfg);

// -- Bayes-boundary preservation ------------------------------------------

struct BiasRow {
  double delta = 0.0;
  double max_gap = 0.0;
  Eigen::VectorXi worst_v;
};

struct BiasReport {
  /// All topics share one expected length (within 1e-12 relative).
  bool equal_length = false;
  std::vector<BiasRow> rows;
  /// Built-in unequal-length control (lambda0 = (1), lambda1 = (2)).
  std::vector<BiasRow> control_rows;
  /// Equal-length models: every max_gap <= 1e-10. Negative-control mode
  /// (unequal lengths) reports true iff some gap is nonzero.
  bool passed = false;
};

BiasReport run_bias_check(const TopicModel &model,
                          std::span<const double> delta_grid, int v_budget);

/// The unequal-length control model used by run_bias_check.
TopicModel unequal_length_control();

// -- altitude sweep ------------------------------------------------------------

struct AltitudeConfig {
  Eigen::VectorXd weights;
  Eigen::VectorXd intensity;
  double delta = 0.5;
};

struct AltitudeRow {
  AltitudeConfig config;
  ScoreMoments moments;
  double psi = 0.0;
  GaussianErrorEstimate gaussian;
  TopicErrorEstimate measured;
  BoundReport bound;
  /// measured eps <= bound rhs; vacuous rows count as holding.
  bool bound_holds = false;
  /// log eps / log eps~ and its Gaussian-level target 1 / (1 - delta).
  double empirical_exponent = 0.0;
  double target_exponent = 0.0;
};

/// For each config (requires mu > 0): Monte Carlo (eps, eps~), their
/// normal approximations, and the explicit bound evaluated at the
/// measured eps~.
std::vector<AltitudeRow> run_altitude_sweep(std::span<const AltitudeConfig> configs,
                                            std::int64_t mc_budget,
                                            std::uint64_t seed, int threads = 1);

} // namespace droplab
