#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "droplab/classifiers.hpp"
#include "droplab/errors.hpp"
#include "droplab/stats.hpp"
#include "droplab/topic_model.hpp"

namespace droplab {

/// Berry-Esseen constant for weighted sums of independent Poissons.
inline constexpr double kBerryEsseenConstant = 4.0;

/// Mean and variance of the score S = w.x for x_j ~ Poisson(lambda_j).
struct ScoreMoments {
  double mu = 0.0;
  double sigma2 = 0.0;

  /// Moments of the thinned score: ((1 - delta) mu, (1 - delta) sigma2).
  ScoreMoments thinned(double delta) const {
    return {(1.0 - delta) * mu, (1.0 - delta) * sigma2};
  }
};

template <typename DW, typename DL>
ScoreMoments score_moments(const Eigen::MatrixBase<DW> &w,
                           const Eigen::MatrixBase<DL> &intensity) {
  if (w.size() != intensity.size()) {
    throw InvalidArgument("weights and intensity differ in length");
  }
  return {static_cast<double>(intensity.dot(w)),
          static_cast<double>(intensity.dot(w.cwiseAbs2()))};
}

/// max_j w_j^2 / sum_j lambda_j w_j^2.
template <typename DW, typename DL>
double psi(const Eigen::MatrixBase<DW> &w,
           const Eigen::MatrixBase<DL> &intensity) {
  const ScoreMoments m = score_moments(w, intensity);
  if (!(m.sigma2 > 0.0)) {
    throw ZeroVariance("score variance is zero");
  }
  return static_cast<double>(w.cwiseAbs2().maxCoeff()) / m.sigma2;
}

/// Balance ratio max_j w_j^2 * sum_j lambda_j / sum_j lambda_j w_j^2.
template <typename DW, typename DL>
double kappa(const Eigen::MatrixBase<DW> &w,
             const Eigen::MatrixBase<DL> &intensity) {
  return psi(w, intensity) * static_cast<double>(intensity.sum());
}

struct GaussianErrorEstimate {
  double eps = 0.0;       ///< Phi(-mu / sigma)
  double eps_tilde = 0.0; ///< Phi(-sqrt(1 - delta) mu / sigma)
};

/// Normal approximation of the per-topic error on the original and the
/// dropout measure, assuming class 1 is the optimal label.
GaussianErrorEstimate gaussian_error_estimate(const Eigen::Ref<const Eigen::VectorXd> &w,
                                              const Eigen::Ref<const Eigen::VectorXd> &intensity,
                                              double delta);

struct BerryEsseenResult {
  double sup_distance = 0.0;
  double bound = 0.0; ///< C_BE * sqrt(psi)
  double slack = 0.0; ///< DKW half-width at confidence 0.999
  double psi = 0.0;
  std::size_t samples = 0;
  bool passed = false;
};

/// Kolmogorov distance between n_samples draws of S = sum w_j Z_j and its
/// moment-matched normal, compared against C_BE * sqrt(psi) + DKW slack.
/// Sampling uses streams (seed, chunk) so the result does not depend on
/// `threads`.
BerryEsseenResult berry_esseen_check(const Eigen::Ref<const Eigen::VectorXd> &w,
                                     const Eigen::Ref<const Eigen::VectorXd> &intensity,
                                     std::size_t n_samples, std::uint64_t seed,
                                     int threads = 1);

struct BoundReport {
  double delta = 0.0;
  double eps_tilde = 0.0;
  double psi = 0.0;
  double rhs = 0.0;
  double c_be = kBerryEsseenConstant;
  /// True outside the validity region eps_tilde + C sqrt(psi)/sqrt(1-delta)
  /// <= Phi(-1); rhs is then +inf.
  bool vacuous = false;
};

/// Explicit upper bound on the original-measure error given the
/// dropout-measure error eps_tilde:
///   2^{1/(1-d)} sqrt(1-d) sqrt(4 pi)^{d/(1-d)} sqrt(-log a)^{d/(1-d)}
///     a^{1/(1-d)} + C sqrt(psi),   a = eps_tilde + C sqrt(psi) / sqrt(1-d).
BoundReport altitude_bound_rhs(double eps_tilde, double psi, double delta);

struct TailCheck {
  double t = 0.0;
  double lower = 0.0;  ///< t / (t^2 + 1)
  double middle = 0.0; ///< sqrt(2 pi) e^{t^2/2} Phi(-t)
  double upper = 0.0;  ///< 1 / t
  bool holds = false;
};

struct TailReport {
  std::vector<TailCheck> rows;
  bool all_hold = false;
};

/// Checks the Mills-ratio sandwich at every grid point; each inequality
/// must hold with a relative gap above 1e-12. Non-positive t throws.
TailReport gaussian_tail_check(std::span<const double> t_grid);

struct ModelDiagnostics {
  Eigen::VectorXd topic_probs;
  double p_min = 0.0;
  double alpha = 0.0;
  double lambda_min = 0.0;
  double err_min = 0.0;
  Eigen::MatrixXd pi_matrix; ///< d x T, columns are word distributions
  double sigma_min = 0.0;
};

/// Most likely label given the topic (ties go to class 0).
int optimal_label(const TopicModel &model, int topic);

ModelDiagnostics model_diagnostics(const TopicModel &model);

/// Right-hand side sqrt(T / ((1-delta) lambda)) (1 + sqrt(log+(lambda / 2pi))).
double margin_threshold(int topics, double lambda, double delta);

struct MarginResult {
  bool holds = false;
  double threshold = 0.0;
  double sigma_min = 0.0;
  double lambda_min = 0.0;
  /// Minimum-norm solution of S Pi^T w = 1 and its norm.
  Eigen::VectorXd raw_separator;
  double raw_norm = 0.0;
  /// max_tau |c_tau (Pi^T w)_tau - 1|
  double constraint_residual = 0.0;
  /// sqrt(T) / sigma_min, an upper bound on raw_norm.
  double norm_bound = 0.0;
  /// raw_separator / raw_norm.
  std::optional<Eigen::VectorXd> separator;
};

/// Evaluates the singular-value margin condition and builds the
/// minimum-norm topic separator. Throws RankDeficient when Pi has rank
/// below T.
MarginResult margin_condition(const TopicModel &model, double delta);

struct TopicDiagnostics {
  int topic_id = 0;
  double prob = 0.0;
  double mu = 0.0;
  double sigma2 = 0.0;
  double psi = 0.0;   ///< NaN when sigma2 == 0
  double kappa = 0.0; ///< NaN when sigma2 == 0
  int c_tau = 0;
  Estimate eps;
  Estimate eps_tilde;
};

struct RiskDecomposition {
  Estimate err;
  Estimate err_delta;
  Estimate eta;       ///< Err(clf) - Err(reference), paired
  Estimate eta_tilde; ///< Err_delta(clf) - Err_delta(reference), paired
  double err_min = 0.0;
  std::vector<TopicDiagnostics> per_topic;
  /// Err_delta - Err_min - sum_tau P(tau) eps~_tau |2 P(y=1|tau) - 1|,
  /// estimated from the same draws; zero in expectation.
  Estimate delta_identity_residual;
  std::int64_t samples = 0;
};

/// Monte Carlo estimates of the original and dropout risks of `clf`
/// relative to `reference`, with per-topic sub-optimal prediction rates.
RiskDecomposition excess_risk_decomposition(const TopicModel &model,
                                            const LinearClassifier &clf,
                                            const LinearClassifier &reference,
                                            double delta, std::int64_t mc_budget,
                                            std::uint64_t seed, int threads = 1);

/// Per-topic sub-optimal prediction rates of `clf` on both measures,
/// estimated from draws conditioned on a fixed intensity vector. Used for
/// single-topic configurations: eps = P[h(x) != target], eps~ likewise
/// on thinned x.
struct TopicErrorEstimate {
  Estimate eps;
  Estimate eps_tilde;
  std::int64_t samples = 0;
};

TopicErrorEstimate estimate_topic_errors(const LinearClassifier &clf,
                                         const Eigen::Ref<const Eigen::VectorXd> &intensity,
                                         int target_label, double delta,
                                         std::int64_t samples, std::uint64_t seed,
                                         int threads = 1);

} // namespace droplab
