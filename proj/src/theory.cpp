#include "droplab/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "droplab/dropout.hpp"
#include "droplab/jacobi.hpp"
#include "droplab/parallel.hpp"

namespace droplab {

namespace {

constexpr std::int64_t kChunk = 1 << 16;

std::size_t chunk_count(std::int64_t total) {
  return static_cast<std::size_t>((total + kChunk - 1) / kChunk);
}

std::int64_t chunk_size(std::int64_t total, std::size_t chunk) {
  const std::int64_t start = static_cast<std::int64_t>(chunk) * kChunk;
  return std::min(kChunk, total - start);
}

/// Mean and standard error of a per-sample quantity from its running sums.
Estimate moments_estimate(double sum, double sum_sq, std::int64_t n) {
  if (n <= 0) {
    return {};
  }
  const double nd = static_cast<double>(n);
  const double mean = sum / nd;
  const double var = std::max(0.0, sum_sq / nd - mean * mean);
  return {mean, std::sqrt(var / nd)};
}

} // namespace

GaussianErrorEstimate gaussian_error_estimate(const Eigen::Ref<const Eigen::VectorXd> &w,
                                              const Eigen::Ref<const Eigen::VectorXd> &intensity,
                                              double delta) {
  const ScoreMoments m = score_moments(w, intensity);
  if (!(m.sigma2 > 0.0)) {
    throw ZeroVariance("score variance is zero");
  }
  const double ratio = m.mu / std::sqrt(m.sigma2);
  return {normal_cdf(-ratio), normal_cdf(-std::sqrt(1.0 - delta) * ratio)};
}

BerryEsseenResult berry_esseen_check(const Eigen::Ref<const Eigen::VectorXd> &w,
                                     const Eigen::Ref<const Eigen::VectorXd> &intensity,
                                     std::size_t n_samples, std::uint64_t seed,
                                     int threads) {
  if (n_samples == 0) {
    throw InvalidArgument("berry_esseen_check needs at least one sample");
  }
  const ScoreMoments m = score_moments(w, intensity);
  BerryEsseenResult r;
  r.psi = psi(w, intensity);
  r.bound = kBerryEsseenConstant * std::sqrt(r.psi);
  r.slack = dkw_slack(n_samples, 0.001);
  r.samples = n_samples;

  const auto total = static_cast<std::int64_t>(n_samples);
  std::vector<double> scores(n_samples);
  parallel_for(chunk_count(total), threads, [&](std::size_t c) {
    Rng rng = Rng::stream(seed, {c});
    const std::int64_t start = static_cast<std::int64_t>(c) * kChunk;
    const std::int64_t len = chunk_size(total, c);
    for (std::int64_t k = 0; k < len; ++k) {
      double s = 0.0;
      for (Eigen::Index j = 0; j < w.size(); ++j) {
        s += w[j] * static_cast<double>(poisson(rng, intensity[j]));
      }
      scores[static_cast<std::size_t>(start + k)] = s;
    }
  });
  std::sort(scores.begin(), scores.end());
  const double mu = m.mu;
  const double sigma = std::sqrt(m.sigma2);
  r.sup_distance = kolmogorov_distance(
      scores, [&](double x) { return normal_cdf((x - mu) / sigma); });
  r.passed = r.sup_distance <= r.bound + r.slack;
  return r;
}

BoundReport altitude_bound_rhs(double eps_tilde, double psi_value,
                               double delta) {
  BoundReport r;
  r.delta = delta;
  r.eps_tilde = eps_tilde;
  r.psi = psi_value;
  if (!(delta >= 0.0 && delta < 1.0) || !(psi_value >= 0.0) ||
      !(eps_tilde >= 0.0 && eps_tilde <= 1.0)) {
    r.vacuous = true;
    r.rhs = std::numeric_limits<double>::infinity();
    return r;
  }
  const double keep = 1.0 - delta;
  const double root_psi = std::sqrt(psi_value);
  const double a = eps_tilde + r.c_be * root_psi / std::sqrt(keep);
  if (a > normal_cdf(-1.0) || a <= 0.0) {
    r.vacuous = a > 0.0;
    r.rhs = a > 0.0 ? std::numeric_limits<double>::infinity()
                    : r.c_be * root_psi;
    return r;
  }
  const double odds = delta / keep; // delta / (1 - delta)
  const double inv = 1.0 / keep;    // 1 / (1 - delta)
  const double prefactor = std::pow(2.0, inv) * std::sqrt(keep) /
                           std::pow(std::sqrt(4.0 * M_PI), -odds);
  r.rhs = prefactor * std::pow(std::sqrt(-std::log(a)), odds) *
              std::pow(a, inv) +
          r.c_be * root_psi;
  return r;
}

TailReport gaussian_tail_check(std::span<const double> t_grid) {
  constexpr double kRelGap = 1e-12;
  TailReport report;
  report.all_hold = true;
  for (double t : t_grid) {
    if (!(t > 0.0)) {
      throw InvalidArgument("gaussian_tail_check requires t > 0");
    }
    TailCheck row;
    row.t = t;
    row.lower = t / (t * t + 1.0);
    row.middle = std::sqrt(2.0 * M_PI) * std::exp(0.5 * t * t) * normal_cdf(-t);
    row.upper = 1.0 / t;
    row.holds = row.lower < row.middle * (1.0 - kRelGap) &&
                row.middle * (1.0 + kRelGap) < row.upper;
    report.all_hold = report.all_hold && row.holds;
    report.rows.push_back(row);
  }
  return report;
}

int optimal_label(const TopicModel &model, int topic) {
  return model.label1_given_topic(topic) > 0.5 ? 1 : 0;
}

ModelDiagnostics model_diagnostics(const TopicModel &model) {
  const int T = model.num_topics();
  const int d = model.vocab_size();
  ModelDiagnostics out;
  out.topic_probs.resize(T);
  out.pi_matrix.resize(d, T);
  out.p_min = 1.0;
  out.alpha = 0.5;
  out.lambda_min = std::numeric_limits<double>::infinity();
  for (int t = 0; t < T; ++t) {
    const double pt = model.topic_prob(t);
    const double p1 = model.label1_given_topic(t);
    out.topic_probs[t] = pt;
    out.p_min = std::min(out.p_min, pt);
    out.alpha = std::min(out.alpha, std::fabs(p1 - 0.5));
    out.err_min += pt * std::min(p1, 1.0 - p1);
    out.lambda_min = std::min(out.lambda_min, model.topic(t).doc_length());
    out.pi_matrix.col(t) = model.topic(t).word_probs();
  }
  const Eigen::MatrixXd gram = out.pi_matrix.transpose() * out.pi_matrix;
  const auto eig = jacobi_eigen(gram);
  out.sigma_min = std::sqrt(std::max(0.0, eig.eigenvalues[0]));
  return out;
}

double margin_threshold(int topics, double lambda, double delta) {
  if (!(delta < 1.0) || !(lambda > 0.0)) {
    return std::numeric_limits<double>::infinity();
  }
  const double log_plus = std::max(0.0, std::log(lambda / (2.0 * M_PI)));
  return std::sqrt(topics / ((1.0 - delta) * lambda)) *
         (1.0 + std::sqrt(log_plus));
}

MarginResult margin_condition(const TopicModel &model, double delta) {
  const ModelDiagnostics diag = model_diagnostics(model);
  const int T = model.num_topics();
  const Eigen::MatrixXd gram = diag.pi_matrix.transpose() * diag.pi_matrix;
  const auto eig = jacobi_eigen(gram);
  const double largest = eig.eigenvalues[T - 1];
  if (T > model.vocab_size() || !(eig.eigenvalues[0] > 1e-12 * largest)) {
    throw RankDeficient("topic matrix has rank below the number of topics");
  }

  MarginResult r;
  r.sigma_min = diag.sigma_min;
  r.lambda_min = diag.lambda_min;
  r.threshold = margin_threshold(T, diag.lambda_min, delta);
  r.holds = r.sigma_min >= r.threshold;

  Eigen::VectorXd signs(T);
  for (int t = 0; t < T; ++t) {
    signs[t] = optimal_label(model, t) == 1 ? 1.0 : -1.0;
  }
  // (Pi^T Pi)^{-1} s through the Jacobi eigenbasis.
  const Eigen::VectorXd coeffs =
      eig.eigenvectors *
      (eig.eigenvectors.transpose() * signs).cwiseQuotient(eig.eigenvalues);
  r.raw_separator = diag.pi_matrix * coeffs;
  r.raw_norm = r.raw_separator.norm();
  const Eigen::VectorXd margins =
      signs.cwiseProduct(diag.pi_matrix.transpose() * r.raw_separator);
  r.constraint_residual = (margins.array() - 1.0).abs().maxCoeff();
  r.norm_bound = std::sqrt(static_cast<double>(T)) / r.sigma_min;
  r.separator = r.raw_separator / r.raw_norm;
  return r;
}

namespace {

struct TopicTally {
  std::int64_t n = 0;
  std::int64_t off = 0;         // h(x) != c_tau
  std::int64_t off_thinned = 0; // h(x~) != c_tau
};

struct DecompositionTally {
  std::int64_t n = 0;
  std::int64_t err = 0;
  std::int64_t err_delta = 0;
  double eta_sum = 0.0;
  double eta_sq = 0.0;
  double eta_tilde_sum = 0.0;
  double eta_tilde_sq = 0.0;
  double resid_sum = 0.0;
  double resid_sq = 0.0;
  std::vector<TopicTally> topics;

  void merge(const DecompositionTally &o) {
    n += o.n;
    err += o.err;
    err_delta += o.err_delta;
    eta_sum += o.eta_sum;
    eta_sq += o.eta_sq;
    eta_tilde_sum += o.eta_tilde_sum;
    eta_tilde_sq += o.eta_tilde_sq;
    resid_sum += o.resid_sum;
    resid_sq += o.resid_sq;
    for (std::size_t t = 0; t < topics.size(); ++t) {
      topics[t].n += o.topics[t].n;
      topics[t].off += o.topics[t].off;
      topics[t].off_thinned += o.topics[t].off_thinned;
    }
  }
};

} // namespace

RiskDecomposition excess_risk_decomposition(const TopicModel &model,
                                            const LinearClassifier &clf,
                                            const LinearClassifier &reference,
                                            double delta, std::int64_t mc_budget,
                                            std::uint64_t seed, int threads) {
  if (mc_budget <= 0) {
    throw InvalidArgument("mc_budget must be positive");
  }
  if (clf.weights.size() != model.vocab_size() ||
      reference.weights.size() != model.vocab_size()) {
    throw InvalidArgument("classifier width differs from vocab_size");
  }
  const int T = model.num_topics();
  std::vector<int> c_tau(static_cast<std::size_t>(T));
  std::vector<double> margin(static_cast<std::size_t>(T));
  std::vector<double> wrong_if_c(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    const double p1 = model.label1_given_topic(t);
    c_tau[static_cast<std::size_t>(t)] = optimal_label(model, t);
    margin[static_cast<std::size_t>(t)] = std::fabs(2.0 * p1 - 1.0);
    wrong_if_c[static_cast<std::size_t>(t)] = std::min(p1, 1.0 - p1);
  }

  const GenerativeSampler sampler(model);
  const std::size_t chunks = chunk_count(mc_budget);
  std::vector<DecompositionTally> tallies(chunks);
  parallel_for(chunks, threads, [&](std::size_t c) {
    DecompositionTally &tally = tallies[c];
    tally.topics.assign(static_cast<std::size_t>(T), {});
    Rng rng = Rng::stream(seed, {c});
    const std::int64_t len = chunk_size(mc_budget, c);
    for (std::int64_t k = 0; k < len; ++k) {
      const Document doc = sample_document(sampler, rng);
      const Eigen::VectorXi thinned = thin_counts(doc.counts, delta, rng);
      const auto t = static_cast<std::size_t>(doc.topic_id);
      const int h = clf.predict(doc.counts);
      const int h_thin = clf.predict(thinned);
      const int r = reference.predict(doc.counts);
      const int r_thin = reference.predict(thinned);
      const int e = h != doc.label;
      const int e_thin = h_thin != doc.label;
      tally.n += 1;
      tally.err += e;
      tally.err_delta += e_thin;
      const double eta = e - (r != doc.label);
      const double eta_t = e_thin - (r_thin != doc.label);
      tally.eta_sum += eta;
      tally.eta_sq += eta * eta;
      tally.eta_tilde_sum += eta_t;
      tally.eta_tilde_sq += eta_t * eta_t;
      const int off_thin = h_thin != c_tau[t];
      const double resid = e_thin - wrong_if_c[t] - off_thin * margin[t];
      tally.resid_sum += resid;
      tally.resid_sq += resid * resid;
      auto &tt = tally.topics[t];
      tt.n += 1;
      tt.off += h != c_tau[t];
      tt.off_thinned += off_thin;
    }
  });
  DecompositionTally total;
  total.topics.assign(static_cast<std::size_t>(T), {});
  for (const auto &t : tallies) {
    total.merge(t);
  }

  RiskDecomposition out;
  out.samples = total.n;
  out.err = proportion(total.err, total.n);
  out.err_delta = proportion(total.err_delta, total.n);
  out.eta = moments_estimate(total.eta_sum, total.eta_sq, total.n);
  out.eta_tilde = moments_estimate(total.eta_tilde_sum, total.eta_tilde_sq, total.n);
  out.delta_identity_residual =
      moments_estimate(total.resid_sum, total.resid_sq, total.n);
  const ModelDiagnostics diag = model_diagnostics(model);
  out.err_min = diag.err_min;
  for (int t = 0; t < T; ++t) {
    const auto &tt = total.topics[static_cast<std::size_t>(t)];
    TopicDiagnostics td;
    td.topic_id = model.topic(t).id;
    td.prob = diag.topic_probs[t];
    const ScoreMoments m = score_moments(clf.weights, model.topic(t).intensity);
    td.mu = m.mu;
    td.sigma2 = m.sigma2;
    if (m.sigma2 > 0.0) {
      td.psi = psi(clf.weights, model.topic(t).intensity);
      td.kappa = kappa(clf.weights, model.topic(t).intensity);
    } else {
      td.psi = td.kappa = std::numeric_limits<double>::quiet_NaN();
    }
    td.c_tau = c_tau[static_cast<std::size_t>(t)];
    td.eps = proportion(tt.off, tt.n);
    td.eps_tilde = proportion(tt.off_thinned, tt.n);
    out.per_topic.push_back(td);
  }
  return out;
}

TopicErrorEstimate estimate_topic_errors(const LinearClassifier &clf,
                                         const Eigen::Ref<const Eigen::VectorXd> &intensity,
                                         int target_label, double delta,
                                         std::int64_t samples, std::uint64_t seed,
                                         int threads) {
  if (samples <= 0) {
    throw InvalidArgument("samples must be positive");
  }
  if (clf.weights.size() != intensity.size()) {
    throw InvalidArgument("classifier width differs from intensity length");
  }
  const std::size_t chunks = chunk_count(samples);
  std::vector<std::pair<std::int64_t, std::int64_t>> counts(chunks);
  parallel_for(chunks, threads, [&](std::size_t c) {
    Rng rng = Rng::stream(seed, {c});
    const std::int64_t len = chunk_size(samples, c);
    const double keep = 1.0 - delta;
    std::int64_t off = 0;
    std::int64_t off_thin = 0;
    for (std::int64_t k = 0; k < len; ++k) {
      double s = clf.intercept;
      double s_thin = clf.intercept;
      for (Eigen::Index j = 0; j < intensity.size(); ++j) {
        const std::int64_t x = poisson(rng, intensity[j]);
        const std::int64_t xt = binomial(rng, x, keep);
        s += clf.weights[j] * static_cast<double>(x);
        s_thin += clf.weights[j] * static_cast<double>(xt);
      }
      off += (s > 0.0 ? 1 : 0) != target_label;
      off_thin += (s_thin > 0.0 ? 1 : 0) != target_label;
    }
    counts[c] = {off, off_thin};
  });
  std::int64_t off = 0;
  std::int64_t off_thin = 0;
  for (const auto &[a, b] : counts) {
    off += a;
    off_thin += b;
  }
  return {proportion(off, samples), proportion(off_thin, samples), samples};
}

} // namespace droplab
