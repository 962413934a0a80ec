#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "droplab/errors.hpp"
#include "droplab/stats.hpp"
#include "droplab/theory.hpp"
#include "droplab/verify.hpp"
#include "helpers.hpp"

using namespace droplab;
using testing::make_topic;
using testing::two_topic;

TEST_CASE("score moments") {
  auto m = score_moments(Eigen::Vector2d(1, -1), Eigen::Vector2d(4, 1));
  CHECK(m.mu == 3.0);
  CHECK(m.sigma2 == 5.0);
  m = score_moments(Eigen::Vector2d::Zero(), Eigen::Vector2d(4, 1));
  CHECK(m.mu == 0.0);
  CHECK(m.sigma2 == 0.0);
  m = score_moments(Eigen::Vector2d(1, -1), Eigen::Vector2d(62.5, 37.5));
  CHECK(m.mu == 25.0);
  CHECK(m.sigma2 == 100.0);
  CHECK(m.mu / std::sqrt(m.sigma2) == 2.5);
  const auto t = m.thinned(0.5);
  CHECK(t.mu == 12.5);
  CHECK(t.sigma2 == 50.0);
  CHECK_THROWS_AS(score_moments(Eigen::VectorXd::Ones(2), Eigen::VectorXd::Ones(3)), InvalidArgument);
}

TEST_CASE("psi and kappa") {
  CHECK(psi(Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 4.0)) == 0.25);
  CHECK(kappa(Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 4.0)) == 1.0);
  CHECK(psi(Eigen::Vector2d(3, 1), Eigen::Vector2d(1, 1)) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(kappa(Eigen::Vector2d(3, 1), Eigen::Vector2d(1, 1)) == doctest::Approx(1.8).epsilon(1e-15));
  CHECK(kappa(Eigen::Vector3d(1, -1, 1), Eigen::Vector3d(0.3, 7, 2)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(psi(Eigen::Vector2d::Zero(), Eigen::Vector2d(1, 1)), ZeroVariance);

  const Eigen::Vector3d w(0.5, -2, 1.5), lam(3, 1, 8);
  CHECK(kappa(w, lam) >= 1.0);
  CHECK(psi(Eigen::Vector3d(w * 3.7), lam) == doctest::Approx(psi(w, lam)).epsilon(1e-14));
  CHECK(kappa(Eigen::Vector3d(w * 0.1), lam) == doctest::Approx(kappa(w, lam)).epsilon(1e-14));
}

TEST_CASE("Gaussian error estimates") {
  const auto g = gaussian_error_estimate(Eigen::Vector2d(1, -1), Eigen::Vector2d(62.5, 37.5), 0.5);
  CHECK(g.eps == doctest::Approx(6.209665325776135167e-3).epsilon(1e-12));
  CHECK(g.eps_tilde == doctest::Approx(3.8549935871770884932e-2).epsilon(1e-12));
  CHECK(g.eps < g.eps_tilde);

  const auto zero = gaussian_error_estimate(Eigen::Vector2d(1, -1), Eigen::Vector2d(2, 2), 0.3);
  CHECK(zero.eps == 0.5);
  CHECK(zero.eps_tilde == 0.5);
  const auto same = gaussian_error_estimate(Eigen::Vector2d(2, -1), Eigen::Vector2d(5, 3), 0.0);
  CHECK(same.eps == same.eps_tilde);
  const auto scaled = gaussian_error_estimate(Eigen::Vector2d(6, -3), Eigen::Vector2d(5, 3), 0.4);
  const auto base = gaussian_error_estimate(Eigen::Vector2d(2, -1), Eigen::Vector2d(5, 3), 0.4);
  CHECK(scaled.eps_tilde == doctest::Approx(base.eps_tilde).epsilon(1e-14));
}

TEST_CASE("Gaussian-level exponent at t = 4, delta = 0.5") {
  const double ratio = std::log(normal_cdf(-4.0)) / std::log(normal_cdf(-4.0 * std::sqrt(0.5)));
  CHECK(ratio == doctest::Approx(1.7101271432865836354).epsilon(1e-12));
  CHECK(std::fabs(ratio - 2.0) <= 0.15 * 2.0);
}

TEST_CASE("Berry-Esseen check") {
  const auto a = berry_esseen_check(Eigen::VectorXd::Constant(1, 1.0),
                                    Eigen::VectorXd::Constant(1, 100.0), 1000000, 1, 2);
  CHECK(a.bound == doctest::Approx(0.4));
  CHECK(a.passed);
  CHECK(a.sup_distance < 0.05);
  const auto b = berry_esseen_check(Eigen::Vector2d(1, -1), Eigen::Vector2d(62.5, 37.5), 200000, 2);
  CHECK(b.passed);
  CHECK(b.psi == doctest::Approx(0.01));
  CHECK(b.slack == doctest::Approx(dkw_slack(200000)));
  const auto b3 = berry_esseen_check(Eigen::Vector2d(1, -1), Eigen::Vector2d(62.5, 37.5), 200000, 2, 3);
  CHECK(b3.sup_distance == b.sup_distance);
  CHECK_THROWS_AS(berry_esseen_check(Eigen::Vector2d::Zero(), Eigen::Vector2d(1, 1), 10, 0),
                  ZeroVariance);
}

TEST_CASE("explicit bound") {
  // psi -> 0, delta = 1/2: 4 sqrt(1/2) sqrt(4 pi) sqrt(-log e) e^2.
  const auto r = altitude_bound_rhs(0.01, 0.0, 0.5);
  CHECK_FALSE(r.vacuous);
  CHECK(std::fabs(r.rhs - 0.0021516556471577642947) <= 1e-9);

  const auto fig = altitude_bound_rhs(normal_cdf(-1.7678), 1e-4, 0.5);
  CHECK_FALSE(fig.vacuous);
  CHECK(std::isfinite(fig.rhs));
  CHECK(fig.rhs >= 4.0 * std::sqrt(1e-4));

  CHECK(altitude_bound_rhs(normal_cdf(-1.0), 0.0, 0.5).vacuous == false);
  CHECK(altitude_bound_rhs(normal_cdf(-0.99), 0.0, 0.5).vacuous);
  CHECK(altitude_bound_rhs(0.2, 0.0, 0.5).vacuous);
  CHECK(altitude_bound_rhs(0.05, 0.01, 0.5).vacuous); // 0.05 + 0.4 / sqrt(.5) > Phi(-1)
  for (double e : {1e-6, 1e-4, 1e-2, 0.1}) {
    for (double p : {0.0, 1e-6, 1e-4}) {
      const auto b = altitude_bound_rhs(e, p, 0.3);
      if (!b.vacuous) {
        CHECK(b.rhs >= kBerryEsseenConstant * std::sqrt(p));
      }
    }
  }
}

TEST_CASE("Gaussian tail sandwich") {
  const double grid[] = {0.1, 0.5, 1.0, 2.0, 4.0, 8.0};
  const auto r = gaussian_tail_check(grid);
  CHECK(r.all_hold);
  CHECK(r.rows[2].middle == doctest::Approx(0.65567954241879847154).epsilon(1e-12));
  CHECK(r.rows[2].lower == 0.5);
  CHECK(r.rows[2].upper == 1.0);
  const double ten[] = {10.0};
  const auto t = gaussian_tail_check(ten);
  CHECK(t.all_hold);
  CHECK(t.rows[0].upper / t.rows[0].lower <= 1.01 + 1e-12);
  const double bad[] = {0.0};
  CHECK_THROWS_AS(gaussian_tail_check(bad), InvalidArgument);
}

TEST_CASE("model diagnostics") {
  const auto pure = model_diagnostics(two_topic({3, 1}, {1, 3}));
  CHECK(pure.alpha == 0.5);
  CHECK(pure.err_min == 0.0);
  CHECK(pure.p_min == 0.5);
  CHECK(pure.lambda_min == 4.0);

  const auto ortho = model_diagnostics(orthogonal_topic_model(100.0));
  CHECK(ortho.sigma_min == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  const auto ident = model_diagnostics(two_topic({5, 0}, {0, 7}));
  CHECK(ident.sigma_min == doctest::Approx(1.0).epsilon(1e-12));

  const TopicModel single(0.7, 2, {make_topic(0, 1, 1, {2, 3})});
  const auto s = model_diagnostics(single);
  CHECK(s.err_min == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(s.alpha == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(optimal_label(single, 0) == 1);
  CHECK(optimal_label(TopicModel(0.5, 1, {make_topic(0, 1, 1, {1})}), 0) == 0);
}

TEST_CASE("margin condition") {
  CHECK(margin_threshold(2, 400.0, 0.5) == doctest::Approx(0.30380352010450252533).epsilon(1e-12));

  SUBCASE("identity topics") {
    const auto m = margin_condition(two_topic({400, 0}, {0, 400}), 0.5);
    CHECK(m.holds);
    CHECK(m.sigma_min == doctest::Approx(1.0));
    CHECK(m.constraint_residual <= 1e-9);
    CHECK(m.raw_separator.isApprox(Eigen::Vector2d(-1, 1)));
    REQUIRE(m.separator);
    CHECK(m.separator->norm() == doctest::Approx(1.0));
  }
  SUBCASE("orthogonal blocks at growing lambda") {
    for (double lambda : {100.0, 400.0, 1600.0}) {
      const TopicModel model = orthogonal_topic_model(lambda);
      const auto m = margin_condition(model, 0.5);
      CHECK(m.holds);
      CHECK(m.constraint_residual <= 1e-9);
      const auto diag = model_diagnostics(model);
      const Eigen::MatrixXd g = diag.pi_matrix.transpose() * diag.pi_matrix;
      const double ones = Eigen::VectorXd::Ones(2).dot(g.ldlt().solve(Eigen::VectorXd::Ones(2)));
      CHECK(m.raw_norm <= std::sqrt(ones) + 1e-9);
      CHECK(m.raw_norm <= m.norm_bound + 1e-9);
    }
  }
  SUBCASE("overlapping topics keep the norm bound") {
    const TopicModel model(0.5, 4,
                           {make_topic(0, 0.6, 0.0, {5, 3, 1, 1}),
                            make_topic(1, 0.4, 0.2, {1, 4, 4, 1}),
                            make_topic(2, 0.0, 0.8, {1, 1, 3, 5})});
    const auto m = margin_condition(model, 0.3);
    CHECK(m.constraint_residual <= 1e-9);
    CHECK(m.raw_norm <= m.norm_bound + 1e-9);
    CHECK_FALSE(m.holds); // lambda = 10 is far too short
  }
  SUBCASE("rank deficiency") {
    const TopicModel dup(0.5, 2, {make_topic(0, 1, 0, {2, 1}), make_topic(1, 0, 1, {4, 2})});
    CHECK_THROWS_AS(margin_condition(dup, 0.5), RankDeficient);
  }
}

TEST_CASE("per-topic error estimates") {
  const LinearClassifier clf{Eigen::Vector2d(1, -1), 0.0};
  const auto a = estimate_topic_errors(clf, Eigen::Vector2d(62.5, 37.5), 1, 0.5, 300000, 4, 1);
  const auto b = estimate_topic_errors(clf, Eigen::Vector2d(62.5, 37.5), 1, 0.5, 300000, 4, 3);
  CHECK(a.eps.mean == b.eps.mean);
  CHECK(a.eps_tilde.mean == b.eps_tilde.mean);
  // Exact Skellam values for P[S <= 0].
  CHECK(std::fabs(a.eps.mean - 0.006768397351853528) <= 3.0 * a.eps.se + 1e-12);
  CHECK(std::fabs(a.eps_tilde.mean - 0.04362711865819757) <= 3.0 * a.eps_tilde.se);
  const auto z = estimate_topic_errors(clf, Eigen::Vector2d(62.5, 37.5), 1, 0.0, 10000, 4, 1);
  CHECK(z.eps.mean == z.eps_tilde.mean);
}

TEST_CASE("excess risk decomposition") {
  const TopicModel m(0.5, 3,
                     {make_topic(0, 0.8, 0.1, {6, 2, 2}),
                      make_topic(1, 0.2, 0.2, {2, 6, 2}),
                      make_topic(2, 0.0, 0.7, {2, 2, 6})});
  const LinearClassifier ref{Eigen::Vector3d(-1, 0, 1), 0.0};
  const auto same = excess_risk_decomposition(m, ref, ref, 0.5, 200000, 5, 2);
  CHECK(same.eta.mean == 0.0);
  CHECK(same.eta_tilde.mean == 0.0);
  CHECK(std::fabs(same.delta_identity_residual.mean) <= 3.0 * same.delta_identity_residual.se);
  CHECK(same.err_min == doctest::Approx(model_diagnostics(m).err_min));

  const LinearClassifier other{Eigen::Vector3d(-1, 0.5, 1), -0.5};
  const auto d = excess_risk_decomposition(m, other, ref, 0.5, 200000, 6, 1);
  const auto d3 = excess_risk_decomposition(m, other, ref, 0.5, 200000, 6, 3);
  CHECK(d.err.mean == d3.err.mean);
  CHECK(d.eta.mean == d3.eta.mean);
  CHECK(std::fabs(d.delta_identity_residual.mean) <= 3.0 * d.delta_identity_residual.se);

  SUBCASE("pure topics: error is the topic-weighted sub-optimal rate") {
    const TopicModel pure = two_topic({6, 4}, {4, 6});
    const LinearClassifier c{Eigen::Vector2d(-1, 1), 0.0};
    const auto r = excess_risk_decomposition(pure, c, c, 0.5, 200000, 7, 1);
    double weighted = 0.0;
    for (const auto &t : r.per_topic) {
      weighted += t.prob * t.eps.mean;
    }
    CHECK(std::fabs(r.err.mean - weighted) <= 3.0 * r.err.se);
  }
  SUBCASE("single topic at mu / sigma = 2.5") {
    const TopicModel one(1.0, 2, {make_topic(0, 1, 1, {62.5, 37.5})});
    const LinearClassifier c{Eigen::Vector2d(1, -1), 0.0};
    const auto r = excess_risk_decomposition(one, c, c, 0.5, 1000000, 8, 2);
    const double slack = 4.0 * std::sqrt(0.01);
    CHECK(std::fabs(r.per_topic[0].eps.mean - normal_cdf(-2.5)) <= 3.0 * r.per_topic[0].eps.se + slack);
    CHECK(std::fabs(r.per_topic[0].eps_tilde.mean - normal_cdf(-2.5 / std::sqrt(2.0))) <=
          3.0 * r.per_topic[0].eps_tilde.se + slack);
    CHECK(r.per_topic[0].psi == doctest::Approx(0.01));
    CHECK(r.per_topic[0].kappa == doctest::Approx(1.0));
  }
}
