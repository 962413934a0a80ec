#pragma once

#include <cstdint>
#include <map>

#include <Eigen/Core>

#include "droplab/dataset.hpp"
#include "droplab/dropout.hpp"
#include "droplab/stats.hpp"

namespace droplab {

/// h(x) = 1{w.x + b > 0}. A score of exactly zero predicts class 0.
struct LinearClassifier {
  Eigen::VectorXd weights;
  double intercept = 0.0;

  template <typename Derived>
  double score(const Eigen::MatrixBase<Derived> &x) const {
    return weights.dot(x.template cast<double>()) + intercept;
  }
  template <typename Derived>
  int predict(const Eigen::MatrixBase<Derived> &x) const {
    return score(x) > 0.0 ? 1 : 0;
  }
  Eigen::VectorXd scores(const CountMatrix &counts) const {
    return (counts * weights).array() + intercept;
  }
};

enum class Optimizer { FullBatch, MiniBatch };

struct TrainConfig {
  double l2_weight = 1e-7;
  Optimizer optimizer = Optimizer::FullBatch;
  /// Gradient step. 0 selects 1/L, with L the curvature bound of the
  /// (preconditioned) logistic objective estimated by power iteration.
  double step_size = 0.0;
  int epochs = 300;
  /// Mini-batch size; ignored for full-batch descent.
  int batch_size = 64;
  /// Early stop when the gradient norm falls below this (noise-free runs
  /// only).
  double tolerance = 1e-9;
  DropoutConfig dropout;
  std::uint64_t seed = 0;
  /// Train the intercept jointly. When false b stays at 0 during training
  /// and callers recalibrate it afterwards.
  bool fit_intercept = false;

  void validate() const;
};

/// Logistic regression on the raw counts (dropout settings ignored).
LinearClassifier train_logistic(const Dataset &data, const TrainConfig &cfg);

/// Logistic regression on binomially thinned counts: each epoch every
/// example is thinned mc_replicates times and the gradient is averaged
/// over the replicates. delta = 0 reproduces train_logistic bit for bit.
LinearClassifier train_logistic_dropout(const Dataset &data,
                                        const TrainConfig &cfg);

/// Multinomial naive Bayes with additive smoothing; class-conditional
/// length terms are dropped.
LinearClassifier train_naive_bayes(const Dataset &data, double smoothing = 1.0);

/// Replaces b by the training-error minimizing threshold on the scores
/// w.x. Ties prefer the smaller |b|.
LinearClassifier recalibrate_intercept(const LinearClassifier &clf,
                                       const Dataset &data);

/// Exhaustive zero-one ERM over unit directions on an angular grid (d <= 3).
LinearClassifier erm_zero_one_small(const Dataset &data, int resolution);

struct ErrorReport {
  double error = 0.0;
  std::int64_t mistakes = 0;
  std::int64_t total = 0;
  /// Misclassification rate per latent topic (topics >= 0 only).
  std::map<int, Estimate> per_topic;
};

ErrorReport evaluate_error(const LinearClassifier &clf, const Dataset &data);

/// Error on `replicates` independently thinned copies of `data`, i.e. an
/// estimate of P[y != h(x~)].
ErrorReport evaluate_dropout_error(const LinearClassifier &clf,
                                   const Dataset &data, double delta,
                                   int replicates, Rng &rng);

} // namespace droplab
