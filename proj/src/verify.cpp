#include "droplab/verify.hpp"

#include <cmath>

#include "droplab/dropout.hpp"
#include "droplab/errors.hpp"
#include "droplab/experiments.hpp"
#include "droplab/random.hpp"
#include "droplab/stats.hpp"
#include "droplab/theory.hpp"

namespace droplab {

namespace {

template <typename Derived> Json vec(const Eigen::MatrixBase<Derived> &v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    a.push_back(v[i]);
  }
  return a;
}

Json estimate(const Estimate &e) { return {{"mean", e.mean}, {"se", e.se}}; }

Json suite_tails() {
  const double grid[] = {0.1, 0.5, 1.0, 2.0, 4.0, 8.0};
  const auto report = gaussian_tail_check(grid);
  Json rows = Json::array();
  for (const auto &r : report.rows) {
    rows.push_back({{"t", r.t}, {"lower", r.lower}, {"middle", r.middle},
                    {"upper", r.upper}, {"passed", r.holds}});
  }
  return {{"checks", rows}, {"passed", report.all_hold}};
}

Json suite_berry_esseen(const VerifyOptions &o) {
  Json rows = Json::array();
  bool ok = true;
  std::uint64_t k = 0;
  for (const auto &c : berry_esseen_cases()) {
    const auto r = berry_esseen_check(c.w, c.intensity, static_cast<std::size_t>(o.mc),
                                      derive_seed(o.seed, {k++}), o.threads);
    ok = ok && r.passed;
    rows.push_back({{"w", vec(c.w)}, {"intensity", vec(c.intensity)}, {"psi", r.psi},
                    {"sup_distance", r.sup_distance}, {"bound", r.bound},
                    {"dkw_slack", r.slack}, {"samples", r.samples}, {"passed", r.passed}});
  }
  return {{"checks", rows}, {"passed", ok}};
}

Json suite_altitude(const VerifyOptions &o) {
  // The first row is the reference configuration (mu / sigma = 2.5) whose
  // exponent is checked; the long-document rows keep the bound non-vacuous.
  std::vector<AltitudeConfig> cfgs{
      {Eigen::Vector2d(1, -1), Eigen::Vector2d(62.5, 37.5), 0.5},
      {Eigen::Vector2d(1, -1), Eigen::Vector2d(5125, 4875), 0.5},
      {Eigen::Vector2d(1, -1), Eigen::Vector2d(5125, 4875), 0.25},
      {Eigen::Vector2d(1, -1), Eigen::Vector2d(20250, 19750), 0.5},
  };
  const auto rows = run_altitude_sweep(cfgs, o.mc, o.seed, o.threads);
  Json out = Json::array();
  bool ok = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto &r = rows[i];
    const bool exponent_checked = i == 0;
    const bool exponent_ok =
        r.empirical_exponent >= 1.6 && r.empirical_exponent <= 2.4;
    ok = ok && r.bound_holds && (!exponent_checked || exponent_ok);
    Json row{{"w", vec(r.config.weights)},
             {"intensity", vec(r.config.intensity)},
             {"delta", r.config.delta},
             {"mu", r.moments.mu},
             {"sigma2", r.moments.sigma2},
             {"psi", r.psi},
             {"eps_gauss", r.gaussian.eps},
             {"eps_tilde_gauss", r.gaussian.eps_tilde},
             {"eps", estimate(r.measured.eps)},
             {"eps_tilde", estimate(r.measured.eps_tilde)},
             {"samples", r.measured.samples},
             {"bound_rhs", r.bound.rhs},
             {"vacuous", r.bound.vacuous},
             {"bound_holds", r.bound_holds},
             {"empirical_exponent", r.empirical_exponent},
             {"target_exponent", r.target_exponent}};
    if (exponent_checked) {
      row["exponent_in_range"] = exponent_ok;
    }
    out.push_back(row);
  }
  return {{"checks", out}, {"passed", ok}};
}

Json bias_row(const BiasRow &r) {
  return {{"delta", r.delta}, {"max_gap", r.max_gap}, {"worst_v", vec(r.worst_v)}};
}

Json suite_bias() {
  const double deltas[] = {0.25, 0.5, 0.9};
  Json models = Json::array();
  bool ok = true;
  Json control = Json::array();
  for (const auto &m : equal_length_models()) {
    const auto r = run_bias_check(m, deltas, 6);
    ok = ok && r.passed;
    Json rows = Json::array();
    for (const auto &row : r.rows) {
      rows.push_back(bias_row(row));
    }
    models.push_back({{"topics", m.num_topics()}, {"vocab_size", m.vocab_size()},
                      {"rows", rows}, {"passed", r.passed}});
    if (control.empty()) {
      for (const auto &row : r.control_rows) {
        control.push_back(bias_row(row));
      }
    }
  }
  // Control: lambda0 = (1), lambda1 = (2) at v = (0), delta = 0.5.
  const TopicModel ctl = unequal_length_control();
  const Eigen::VectorXi zero = Eigen::VectorXi::Zero(1);
  const double gap =
      std::fabs(dropout_posterior(ctl, 0.5, zero) - bayes_posterior(ctl, zero));
  const bool control_ok = gap >= 0.05;
  return {{"models", models},
          {"control", {{"rows", control}, {"gap_at_zero", gap}, {"passed", control_ok}}},
          {"passed", ok && control_ok}};
}

Json suite_margin(const VerifyOptions &o) {
  Json rows = Json::array();
  bool ok = true;
  std::uint64_t k = 0;
  for (double lambda : {100.0, 400.0, 1600.0}) {
    const double delta = 0.5;
    const TopicModel model = orthogonal_topic_model(lambda);
    const auto m = margin_condition(model, delta);
    const LinearClassifier clf{m.raw_separator, 0.0};
    Json topics = Json::array();
    bool topics_ok = true;
    for (int t = 0; t < model.num_topics(); ++t) {
      const auto est = estimate_topic_errors(clf, model.topic(t).intensity,
                                             optimal_label(model, t), delta, o.mc,
                                             derive_seed(o.seed, {k++}), o.threads);
      const double limit = 1.0 / std::sqrt(lambda) + 3.0 * est.eps_tilde.se;
      const bool pass = est.eps_tilde.mean <= limit;
      topics_ok = topics_ok && pass;
      topics.push_back({{"topic", t}, {"eps_tilde", estimate(est.eps_tilde)},
                        {"limit", limit}, {"passed", pass}});
    }
    const bool pass = m.holds && m.constraint_residual <= 1e-9 && topics_ok;
    ok = ok && pass;
    rows.push_back({{"lambda", lambda}, {"delta", delta}, {"sigma_min", m.sigma_min},
                    {"threshold", m.threshold}, {"condition_holds", m.holds},
                    {"separator", vec(m.raw_separator)},
                    {"constraint_residual", m.constraint_residual},
                    {"topics", topics}, {"passed", pass}});
  }
  return {{"checks", rows}, {"passed", ok}};
}

Json suite_thinning(const VerifyOptions &o) {
  const std::int64_t n = 100000;
  const double delta = 0.3;
  Rng rng = Rng::stream(o.seed, {0x7468696eULL});
  std::vector<std::int64_t> draws(static_cast<std::size_t>(n));
  for (auto &x : draws) {
    x = binomial(rng, poisson(rng, 10.0), 1.0 - delta);
  }
  const auto r = chi_square_gof(draws, [](std::int64_t k) { return poisson_pmf(k, 7.0); });
  const bool pass = r.p_value > 1e-3;
  return {{"checks", Json::array({{{"mean", 10.0}, {"delta", delta}, {"draws", n},
                                   {"statistic", r.statistic}, {"dof", r.dof},
                                   {"bins", r.bins}, {"p_value", r.p_value},
                                   {"passed", pass}}})},
          {"passed", pass}};
}

} // namespace

const std::vector<std::string> &verify_suites() {
  static const std::vector<std::string> names{"tails", "berry-esseen", "altitude",
                                              "bias", "margin", "thinning"};
  return names;
}

std::vector<BerryEsseenCase> berry_esseen_cases() {
  Eigen::VectorXd w5(20);
  for (int j = 0; j < 20; ++j) {
    w5[j] = (j % 2 == 0 ? 1.0 : -1.0) * (1.0 + 0.1 * j);
  }
  return {
      {Eigen::Vector2d(1, -1), Eigen::Vector2d(5125, 4875)},      // psi = 1e-4
      {Eigen::Vector2d(1, -1), Eigen::Vector2d(62.5, 37.5)},      // psi = 0.01
      {w5, Eigen::VectorXd::Constant(20, 5.0)},                   // psi ~ 0.021
      {Eigen::Vector3d(3, 1, -2), Eigen::Vector3d(10, 20, 5)},    // psi = 9/130
      {Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 4.0)}, // psi = 0.25
  };
}

std::vector<TopicModel> equal_length_models() {
  auto topic = [](int id, double r0, double r1, Eigen::VectorXd lam) {
    Topic t;
    t.id = id;
    t.rho0 = r0;
    t.rho1 = r1;
    t.intensity = std::move(lam);
    return t;
  };
  std::vector<TopicModel> models;
  models.emplace_back(0.5, 2,
                      std::vector<Topic>{topic(0, 1, 0, Eigen::Vector2d(2, 1)),
                                         topic(1, 0, 1, Eigen::Vector2d(1, 2))});
  models.emplace_back(0.4, 3,
                      std::vector<Topic>{topic(0, 0.6, 0.1, Eigen::Vector3d(4, 1, 1)),
                                         topic(1, 0.3, 0.3, Eigen::Vector3d(1, 4, 1)),
                                         topic(2, 0.1, 0.6, Eigen::Vector3d(1, 1, 4))});
  models.emplace_back(0.5, 4,
                      std::vector<Topic>{topic(0, 0.7, 0.2, Eigen::Vector4d(2, 2, 0, 1)),
                                         topic(1, 0.3, 0.8, Eigen::Vector4d(0, 1, 3, 1))});
  return models;
}

TopicModel orthogonal_topic_model(double lambda) {
  Topic t0;
  t0.id = 0;
  t0.rho0 = 1.0;
  t0.intensity = Eigen::Vector4d(0.5, 0.5, 0, 0) * lambda;
  Topic t1;
  t1.id = 1;
  t1.rho1 = 1.0;
  t1.intensity = Eigen::Vector4d(0, 0, 0.5, 0.5) * lambda;
  return TopicModel(0.5, 4, {t0, t1});
}

Json run_verify_suite(const std::string &suite, const VerifyOptions &opts) {
  if (opts.mc < 1) {
    throw InvalidArgument("--mc must be positive");
  }
  Json body;
  if (suite == "tails") {
    body = suite_tails();
  } else if (suite == "berry-esseen") {
    body = suite_berry_esseen(opts);
  } else if (suite == "altitude") {
    body = suite_altitude(opts);
  } else if (suite == "bias") {
    body = suite_bias();
  } else if (suite == "margin") {
    body = suite_margin(opts);
  } else if (suite == "thinning") {
    body = suite_thinning(opts);
  } else if (suite == "all") {
    Json parts = Json::object();
    bool ok = true;
    for (const auto &name : verify_suites()) {
      parts[name] = run_verify_suite(name, opts);
      ok = ok && parts[name]["passed"].get<bool>();
    }
    return {{"suite", "all"}, {"suites", parts}, {"passed", ok}};
  } else {
    throw InvalidArgument("unknown suite '" + suite + "'");
  }
  Json out{{"suite", suite}};
  out.update(body);
  return out;
}

} // namespace droplab
