#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "droplab/random.hpp"

namespace droplab {

/// One mixture component: label-conditional probabilities and the Poisson
/// intensity vector (expected count of every word in a document).
struct Topic {
  int id = 0;
  double rho0 = 0.0;
  double rho1 = 0.0;
  Eigen::VectorXd intensity;

  double rho(int label) const { return label == 1 ? rho1 : rho0; }
  /// Expected document length ||lambda||_1.
  double doc_length() const { return intensity.sum(); }
  /// lambda / ||lambda||_1.
  Eigen::VectorXd word_probs() const { return intensity / doc_length(); }
};

/// Discrete Poisson topic model: y -> topic -> independent Poisson counts.
/// Immutable after construction; the constructor validates every
/// invariant and throws InvalidArgument on violation.
class TopicModel {
public:
  TopicModel(double label_prior, int vocab_size, std::vector<Topic> topics);

  double label_prior() const { return label_prior_; }
  double label_prob(int label) const {
    return label == 1 ? label_prior_ : 1.0 - label_prior_;
  }
  int vocab_size() const { return vocab_size_; }
  int num_topics() const { return static_cast<int>(topics_.size()); }
  const std::vector<Topic> &topics() const { return topics_; }
  const Topic &topic(int index) const { return topics_.at(index); }

  /// P(topic = index), marginal over labels.
  double topic_prob(int index) const;
  /// P(y = 1 | topic = index). Returns label_prior for a topic of mass 0.
  double label1_given_topic(int index) const;

  /// Same topics with labels exchanged (prior -> 1 - prior, rho0 <-> rho1).
  TopicModel label_swapped() const;
  /// Every intensity vector multiplied by `factor` (>= 0).
  TopicModel scaled(double factor) const;

private:
  double label_prior_;
  int vocab_size_;
  std::vector<Topic> topics_;
};

/// A single sample. `topic_id` is latent and must not be shown to
/// classifiers; `topic_value` carries the real-valued topic of parametric
/// samplers (equal to topic_id for discrete models).
struct Document {
  Eigen::VectorXi counts;
  int label = 0;
  int topic_id = 0;
  double topic_value = 0.0;
  std::int64_t length = 0;
};

/// Topic realized for one document.
struct TopicDraw {
  int id = 0;
  double value = 0.0;
  Eigen::VectorXd intensity;
};

/// Continuous-topic model given by a label prior and a per-label draw of
/// the intensity vector. `draw` must be a deterministic function of
/// (label, rng state).
struct ParametricModel {
  std::string name;
  double label_prior = 0.5;
  int vocab_size = 0;
  std::function<TopicDraw(int label, Rng &rng)> draw;
  /// Parameters used to build the preset, recorded for provenance.
  std::vector<std::pair<std::string, double>> params;
};

class GenerativeSampler {
public:
  GenerativeSampler(TopicModel model) : kind_(std::move(model)) {}
  GenerativeSampler(ParametricModel model);

  bool is_discrete() const {
    return std::holds_alternative<TopicModel>(kind_);
  }
  /// Throws InvalidArgument for parametric samplers.
  const TopicModel &discrete() const;
  const ParametricModel *parametric() const {
    return std::get_if<ParametricModel>(&kind_);
  }

  double label_prior() const;
  int vocab_size() const;

  int draw_label(Rng &rng) const;
  TopicDraw draw_topic(int label, Rng &rng) const;

private:
  std::variant<TopicModel, ParametricModel> kind_;
};

/// y ~ Bernoulli(prior), topic ~ rho_y, x_j ~ Poisson(lambda_j) independent.
Document sample_document(const GenerativeSampler &sampler, Rng &rng);

/// Same law through L ~ Poisson(||lambda||_1), x | L ~ Multinomial(pi, L).
Document sample_document_multinomial(const GenerativeSampler &sampler,
                                     Rng &rng);

/// Poisson counts for a given intensity vector.
Eigen::VectorXi sample_counts(const Eigen::Ref<const Eigen::VectorXd> &intensity,
                              Rng &rng);

/// log P(x = v | topic) including the factorial terms. -inf when some
/// v_j > 0 has lambda_j = 0.
double topic_log_likelihood(const Topic &topic,
                            const Eigen::Ref<const Eigen::VectorXi> &v);

/// P(y = 1 | x = v), computed in log space. Throws UndefinedPosterior when
/// both class likelihoods are zero.
double bayes_posterior(const TopicModel &model,
                       const Eigen::Ref<const Eigen::VectorXi> &v);

struct BayesErrorResult {
  double error = 0.0;
  /// Probability mass of {v : sum v > max_total_count}, which the error
  /// sum does not cover.
  double truncation_mass = 0.0;
  int max_total_count = 0;
  std::int64_t cells = 0;
};

/// Default truncation level: longest expected document plus ten standard
/// deviations.
int default_truncation(const TopicModel &model);

/// Bayes risk summed over all v with sum v <= max_total_count. Throws
/// EnumerationTooLarge if the number of such v exceeds cell_budget.
BayesErrorResult bayes_error(const TopicModel &model,
                             std::optional<int> max_total_count = std::nullopt,
                             std::int64_t cell_budget = 20'000'000);

/// Number of v in N^d with sum v <= total (saturates at int64 max).
std::int64_t count_cells(int dims, int total);

/// Calls `visit(v)` for every v in N^d with sum v <= total, in
/// lexicographic order.
void for_each_count_vector(int dims, int total,
                           const std::function<void(const Eigen::VectorXi &)> &visit);

/// Parameters of the synthetic block model: label 0 always uses topic 0
/// with theta = 1 on the first block; label 1 draws tau ~ Exp(rate) and
/// uses theta = tau on the second block; lambda = total * softmax(theta).
struct SyntheticParams {
  double label_prior = 0.5;
  double exp_rate = 3.0;
  int vocab_size = 500;
  int block_size = 7;
  double expected_length = 1000.0;
};

/// Intensity vector of the synthetic model for a given label and tau
/// (tau is ignored for label 0).
Eigen::VectorXd synthetic_intensity(const SyntheticParams &params, int label,
                                    double tau);

GenerativeSampler build_synthetic_model(const SyntheticParams &params = {});

/// Looks up a named parametric preset ("synthetic-sec6"). Unknown names
/// throw InvalidArgument.
GenerativeSampler preset_sampler(const std::string &name,
                                 const std::vector<std::pair<std::string, double>> &overrides = {});

} // namespace droplab
