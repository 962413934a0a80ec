#include "droplab/topic_model.hpp"

#include <cmath>
#include <limits>

#include "droplab/errors.hpp"

namespace droplab {

namespace {

constexpr double kSimplexTol = 1e-12;

double log_sum_exp(double a, double b) {
  if (a == -HUGE_VAL) {
    return b;
  }
  if (b == -HUGE_VAL) {
    return a;
  }
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

} // namespace

TopicModel::TopicModel(double label_prior, int vocab_size,
                       std::vector<Topic> topics)
    : label_prior_(label_prior), vocab_size_(vocab_size),
      topics_(std::move(topics)) {
  if (!(label_prior_ >= 0.0 && label_prior_ <= 1.0)) {
    throw InvalidArgument("label_prior must lie in [0, 1]");
  }
  if (vocab_size_ <= 0) {
    throw InvalidArgument("vocab_size must be positive");
  }
  if (topics_.empty()) {
    throw InvalidArgument("a topic model needs at least one topic");
  }
  double sum0 = 0.0;
  double sum1 = 0.0;
  for (const auto &t : topics_) {
    if (t.rho0 < 0.0 || t.rho1 < 0.0) {
      throw InvalidArgument("topic probabilities must be non-negative");
    }
    if (t.intensity.size() != vocab_size_) {
      throw InvalidArgument("intensity vector length differs from vocab_size");
    }
    if (!t.intensity.allFinite() || (t.intensity.array() < 0.0).any()) {
      throw InvalidArgument("intensities must be finite and non-negative");
    }
    if (!(t.doc_length() > 0.0)) {
      throw InvalidArgument("every topic needs a positive expected length");
    }
    sum0 += t.rho0;
    sum1 += t.rho1;
  }
  if (std::fabs(sum0 - 1.0) > kSimplexTol ||
      std::fabs(sum1 - 1.0) > kSimplexTol) {
    throw InvalidArgument("topic probabilities must sum to 1 for each label");
  }
}

double TopicModel::topic_prob(int index) const {
  const Topic &t = topic(index);
  return (1.0 - label_prior_) * t.rho0 + label_prior_ * t.rho1;
}

double TopicModel::label1_given_topic(int index) const {
  const double p = topic_prob(index);
  if (p <= 0.0) {
    return label_prior_;
  }
  return label_prior_ * topic(index).rho1 / p;
}

TopicModel TopicModel::label_swapped() const {
  std::vector<Topic> swapped = topics_;
  for (auto &t : swapped) {
    std::swap(t.rho0, t.rho1);
  }
  return TopicModel(1.0 - label_prior_, vocab_size_, std::move(swapped));
}

TopicModel TopicModel::scaled(double factor) const {
  if (!(factor > 0.0)) {
    throw InvalidArgument("intensity scale must be positive");
  }
  std::vector<Topic> out = topics_;
  for (auto &t : out) {
    t.intensity *= factor;
  }
  return TopicModel(label_prior_, vocab_size_, std::move(out));
}

GenerativeSampler::GenerativeSampler(ParametricModel model)
    : kind_(std::move(model)) {
  const auto &p = std::get<ParametricModel>(kind_);
  if (!(p.label_prior >= 0.0 && p.label_prior <= 1.0)) {
    throw InvalidArgument("label_prior must lie in [0, 1]");
  }
  if (p.vocab_size <= 0 || !p.draw) {
    throw InvalidArgument("parametric sampler needs a vocabulary and a draw");
  }
}

const TopicModel &GenerativeSampler::discrete() const {
  if (const auto *m = std::get_if<TopicModel>(&kind_)) {
    return *m;
  }
  throw InvalidArgument("operation requires a discrete topic model");
}

double GenerativeSampler::label_prior() const {
  return is_discrete() ? std::get<TopicModel>(kind_).label_prior()
                       : std::get<ParametricModel>(kind_).label_prior;
}

int GenerativeSampler::vocab_size() const {
  return is_discrete() ? std::get<TopicModel>(kind_).vocab_size()
                       : std::get<ParametricModel>(kind_).vocab_size;
}

int GenerativeSampler::draw_label(Rng &rng) const {
  return rng.uniform() < label_prior() ? 1 : 0;
}

TopicDraw GenerativeSampler::draw_topic(int label, Rng &rng) const {
  if (const auto *m = std::get_if<TopicModel>(&kind_)) {
    Eigen::VectorXd rho(m->num_topics());
    for (int t = 0; t < m->num_topics(); ++t) {
      rho[t] = m->topic(t).rho(label);
    }
    const int idx = categorical(rng, rho);
    const Topic &topic = m->topic(idx);
    return {idx, static_cast<double>(idx), topic.intensity};
  }
  const auto &p = std::get<ParametricModel>(kind_);
  TopicDraw d = p.draw(label, rng);
  if (d.intensity.size() != p.vocab_size) {
    throw InvalidArgument("parametric draw returned a wrong-length intensity");
  }
  return d;
}

Eigen::VectorXi sample_counts(const Eigen::Ref<const Eigen::VectorXd> &intensity,
                              Rng &rng) {
  Eigen::VectorXi x(intensity.size());
  for (Eigen::Index j = 0; j < intensity.size(); ++j) {
    x[j] = static_cast<int>(poisson(rng, intensity[j]));
  }
  return x;
}

Document sample_document(const GenerativeSampler &sampler, Rng &rng) {
  Document doc;
  doc.label = sampler.draw_label(rng);
  TopicDraw topic = sampler.draw_topic(doc.label, rng);
  doc.topic_id = topic.id;
  doc.topic_value = topic.value;
  doc.counts = sample_counts(topic.intensity, rng);
  doc.length = doc.counts.cast<std::int64_t>().sum();
  return doc;
}

Document sample_document_multinomial(const GenerativeSampler &sampler,
                                     Rng &rng) {
  Document doc;
  doc.label = sampler.draw_label(rng);
  TopicDraw topic = sampler.draw_topic(doc.label, rng);
  doc.topic_id = topic.id;
  doc.topic_value = topic.value;
  const double length_mean = topic.intensity.sum();
  doc.length = poisson(rng, length_mean);
  doc.counts = multinomial(rng, doc.length, topic.intensity / length_mean);
  return doc;
}

double topic_log_likelihood(const Topic &topic,
                            const Eigen::Ref<const Eigen::VectorXi> &v) {
  if (v.size() != topic.intensity.size()) {
    throw InvalidArgument("count vector length differs from vocab_size");
  }
  double ll = 0.0;
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double lam = topic.intensity[j];
    const int k = v[j];
    if (k < 0) {
      throw InvalidArgument("counts must be non-negative");
    }
    if (k > 0) {
      if (lam == 0.0) {
        return -HUGE_VAL;
      }
      ll += k * std::log(lam) - std::lgamma(k + 1.0);
    }
    ll -= lam;
  }
  return ll;
}

namespace {

/// log P(x = v, y = c) for c = 0, 1.
std::pair<double, double> joint_log_likelihoods(const TopicModel &model,
                                                const Eigen::Ref<const Eigen::VectorXi> &v) {
  double l0 = -HUGE_VAL;
  double l1 = -HUGE_VAL;
  for (const auto &t : model.topics()) {
    const double w0 = model.label_prob(0) * t.rho0;
    const double w1 = model.label_prob(1) * t.rho1;
    if (w0 <= 0.0 && w1 <= 0.0) {
      continue;
    }
    const double ll = topic_log_likelihood(t, v);
    if (w0 > 0.0) {
      l0 = log_sum_exp(l0, std::log(w0) + ll);
    }
    if (w1 > 0.0) {
      l1 = log_sum_exp(l1, std::log(w1) + ll);
    }
  }
  return {l0, l1};
}

} // namespace

double bayes_posterior(const TopicModel &model,
                       const Eigen::Ref<const Eigen::VectorXi> &v) {
  const auto [l0, l1] = joint_log_likelihoods(model, v);
  if (l0 == -HUGE_VAL && l1 == -HUGE_VAL) {
    throw UndefinedPosterior("both class likelihoods are zero at v");
  }
  if (l1 == -HUGE_VAL) {
    return 0.0;
  }
  if (l0 == -HUGE_VAL) {
    return 1.0;
  }
  return 1.0 / (1.0 + std::exp(l0 - l1));
}

std::int64_t count_cells(int dims, int total) {
  // C(total + dims, dims) computed incrementally.
  double c = 1.0;
  for (int i = 1; i <= dims; ++i) {
    c = c * (total + i) / i;
    if (c > 9.0e18) {
      return std::numeric_limits<std::int64_t>::max();
    }
  }
  return static_cast<std::int64_t>(std::llround(c));
}

namespace {

void visit_counts(Eigen::VectorXi &v, int pos, int budget,
                  const std::function<void(const Eigen::VectorXi &)> &visit) {
  if (pos == v.size()) {
    visit(v);
    return;
  }
  for (int k = 0; k <= budget; ++k) {
    v[pos] = k;
    visit_counts(v, pos + 1, budget - k, visit);
  }
  v[pos] = 0;
}

} // namespace

void for_each_count_vector(int dims, int total,
                           const std::function<void(const Eigen::VectorXi &)> &visit) {
  Eigen::VectorXi v = Eigen::VectorXi::Zero(dims);
  visit_counts(v, 0, total, visit);
}

int default_truncation(const TopicModel &model) {
  double longest = 0.0;
  for (const auto &t : model.topics()) {
    longest = std::max(longest, t.doc_length());
  }
  return static_cast<int>(std::ceil(longest + 10.0 * std::sqrt(longest)));
}

BayesErrorResult bayes_error(const TopicModel &model,
                             std::optional<int> max_total_count,
                             std::int64_t cell_budget) {
  BayesErrorResult r;
  r.max_total_count = max_total_count.value_or(default_truncation(model));
  r.cells = count_cells(model.vocab_size(), r.max_total_count);
  if (r.cells > cell_budget) {
    throw EnumerationTooLarge("bayes_error would enumerate " +
                              std::to_string(r.cells) + " cells (budget " +
                              std::to_string(cell_budget) + ")");
  }
  double covered = 0.0;
  double err = 0.0;
  for_each_count_vector(model.vocab_size(), r.max_total_count,
                        [&](const Eigen::VectorXi &v) {
                          const auto [l0, l1] = joint_log_likelihoods(model, v);
                          const double p0 = std::exp(l0);
                          const double p1 = std::exp(l1);
                          covered += p0 + p1;
                          err += std::min(p0, p1);
                        });
  r.error = err;
  r.truncation_mass = std::max(0.0, 1.0 - covered);
  return r;
}

Eigen::VectorXd synthetic_intensity(const SyntheticParams &params, int label,
                                    double tau) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(params.vocab_size);
  if (label == 0) {
    theta.head(params.block_size).setOnes();
  } else {
    theta.segment(params.block_size, params.block_size).setConstant(tau);
  }
  const Eigen::ArrayXd e = (theta.array() - theta.maxCoeff()).exp();
  return params.expected_length * (e / e.sum()).matrix();
}

GenerativeSampler build_synthetic_model(const SyntheticParams &params) {
  if (params.vocab_size < 2 * params.block_size || params.block_size <= 0) {
    throw InvalidArgument("synthetic model needs vocab_size >= 2 * block_size");
  }
  if (!(params.exp_rate > 0.0) || !(params.expected_length > 0.0)) {
    throw InvalidArgument("synthetic model needs positive rate and length");
  }
  ParametricModel m;
  m.name = "synthetic-sec6";
  m.label_prior = params.label_prior;
  m.vocab_size = params.vocab_size;
  m.params = {{"label_prior", params.label_prior},
              {"exp_rate", params.exp_rate},
              {"vocab_size", static_cast<double>(params.vocab_size)},
              {"block_size", static_cast<double>(params.block_size)},
              {"expected_length", params.expected_length}};
  m.draw = [params](int label, Rng &rng) {
    TopicDraw d;
    if (label == 0) {
      d.id = 0;
      d.value = 0.0;
    } else {
      d.id = 1;
      d.value = exponential(rng, params.exp_rate);
    }
    d.intensity = synthetic_intensity(params, label, d.value);
    return d;
  };
  return GenerativeSampler(std::move(m));
}

GenerativeSampler preset_sampler(const std::string &name,
                                 const std::vector<std::pair<std::string, double>> &overrides) {
  if (name != "synthetic-sec6") {
    throw InvalidArgument("unknown model preset '" + name + "'");
  }
  SyntheticParams p;
  for (const auto &[key, value] : overrides) {
    if (key == "label_prior") {
      p.label_prior = value;
    } else if (key == "exp_rate") {
      p.exp_rate = value;
    } else if (key == "vocab_size") {
      p.vocab_size = static_cast<int>(value);
    } else if (key == "block_size") {
      p.block_size = static_cast<int>(value);
    } else if (key == "expected_length") {
      p.expected_length = value;
    } else {
      throw InvalidArgument("unknown parameter '" + key + "' for " + name);
    }
  }
  return build_synthetic_model(p);
}

} // namespace droplab
