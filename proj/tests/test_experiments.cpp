#include <doctest.h>

#include <cmath>
#include <sstream>

#include "droplab/errors.hpp"
#include "droplab/experiments.hpp"
#include "droplab/verify.hpp"
#include "helpers.hpp"

using namespace droplab;
using testing::two_topic;

namespace {

CurveSpec small_spec() {
  CurveSpec spec(GenerativeSampler(two_topic({6, 4, 2}, {3, 4, 5})));
  spec.n_grid = {40, 120};
  spec.delta_grid = {0.0, 0.5, 1.0};
  spec.trials = 2;
  spec.test_size = 5000;
  spec.train_cfg.epochs = 60;
  spec.train_cfg.dropout.mc_replicates = 2;
  spec.master_seed = 11;
  return spec;
}

bool same_record(const CurveRecord &a, const CurveRecord &b) {
  return a.n == b.n && a.delta == b.delta && a.trial == b.trial && a.seed == b.seed &&
         a.test_error == b.test_error && a.train_error == b.train_error;
}

} // namespace

TEST_CASE("curve spec validation") {
  CurveSpec s = small_spec();
  CHECK_NOTHROW(s.validate());
  s.n_grid.clear();
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s = small_spec();
  s.trials = 0;
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s = small_spec();
  s.delta_grid = {1.2};
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
}

TEST_CASE("learning curves are deterministic, ordered and thread independent") {
  const CurveSpec spec = small_spec();
  const CurveResult a = run_learning_curves(spec, 1);
  const CurveResult b = run_learning_curves(spec, 3);
  REQUIRE(a.records.size() == 12);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(same_record(a.records[i], b.records[i]));
    CHECK(a.records[i].failure.empty());
    CHECK(a.records[i].test_error >= 0.0);
    CHECK(a.records[i].test_error <= 1.0);
    CHECK(a.records[i].wall_time_ms == 0.0);
  }
  CHECK(a.records[0].trial == 0);
  CHECK(a.records[0].n == 40);
  CHECK(a.records[1].delta == 0.5);
  CHECK(a.records[11].trial == 1);
  CHECK(curves_csv(a, "x") == curves_csv(b, "x"));

  SUBCASE("dropping cells leaves the others untouched") {
    CurveSpec fewer = spec;
    fewer.n_grid = {120};
    fewer.trials = 1;
    const CurveResult c = run_learning_curves(fewer, 1);
    REQUIRE(c.records.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(same_record(c.records[k], a.records[3 + k]));
    }
  }
  SUBCASE("summary averages trials") {
    const auto cells = a.summary();
    REQUIRE(cells.size() == 6);
    const double manual = (a.records[0].test_error + a.records[6].test_error) / 2.0;
    CHECK(std::fabs(cells[0].test_error.mean - manual) <= 1e-12);
    CHECK(cells[0].count == 2);
  }
}

TEST_CASE("failed cells are recorded, not fatal") {
  CurveSpec spec(GenerativeSampler(two_topic({2, 1}, {1, 2}, 0.995)));
  spec.n_grid = {2};
  spec.delta_grid = {0.0};
  spec.trials = 4;
  spec.test_size = 100;
  spec.train_cfg.epochs = 5;
  const CurveResult r = run_learning_curves(spec, 1);
  bool any_failed = false;
  for (const auto &rec : r.records) {
    if (!rec.failure.empty()) {
      any_failed = true;
      CHECK(std::isnan(rec.test_error));
    }
  }
  CHECK(any_failed);
  CHECK_NOTHROW(r.summary());
}

TEST_CASE("CSV layout") {
  CurveResult r;
  r.records.push_back({100, 0.95, 3, 0.1, 0.05, 0.0, 42, ""});
  const std::string csv = curves_csv(r, "{\"seed\":7}");
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "# {\"seed\":7}");
  std::getline(in, line);
  CHECK(line == "n,delta,trial,test_error,train_error,wall_time_ms,seed");
  std::getline(in, line);
  CHECK(line == "100,0.94999999999999996,3,0.10000000000000001,0.050000000000000003,0,42");
}

TEST_CASE("influence demo") {
  SUBCASE("no dropout gives the plain fit") {
    InfluenceConfig cfg;
    cfg.delta = 0.0;
    cfg.n = 2000;
    cfg.train.epochs = 200;
    const auto r = run_influence_demo(cfg);
    CHECK(r.plain.weights == r.dropout.weights);
    CHECK(r.plain.intercept == r.dropout.intercept);
    CHECK(r.normal_angle_deg == 0.0);
  }
  SUBCASE("default configuration") {
    const auto r = run_influence_demo(InfluenceConfig{});
    CHECK(r.normal_angle_deg > 5.0);
    CHECK(r.dropout_errors.common_red <= r.plain_errors.common_red);
    CHECK(r.posterior_field_gap <= 1e-10);
  }
}

TEST_CASE("bias check") {
  const double deltas[] = {0.25, 0.5, 0.9};
  const auto r = run_bias_check(two_topic({2, 1}, {1, 2}), deltas, 6);
  CHECK(r.equal_length);
  CHECK(r.passed);
  for (const auto &row : r.rows) {
    CHECK(row.max_gap <= 1e-10);
  }
  const double zero[] = {0.0};
  CHECK(run_bias_check(two_topic({2, 1}, {1, 2}), zero, 6).rows[0].max_gap == 0.0);

  REQUIRE(r.control_rows.size() == 3);
  CHECK(r.control_rows[1].max_gap >= 0.1085);

  const auto neg = run_bias_check(unequal_length_control(), deltas, 6);
  CHECK_FALSE(neg.equal_length);
  CHECK(neg.passed); // negative-control mode: a nonzero gap is the expected outcome
  for (const auto &m : equal_length_models()) {
    CHECK(run_bias_check(m, deltas, 6).passed);
  }
}

TEST_CASE("altitude sweep") {
  std::vector<AltitudeConfig> cfgs{
      {Eigen::Vector2d(1, -1), Eigen::Vector2d(62.5, 37.5), 0.0},
      {Eigen::Vector2d(1, -1), Eigen::Vector2d(1281.25, 1218.75), 0.5},
      {Eigen::Vector2d(1, -1), Eigen::Vector2d(5125, 4875), 0.5},
  };
  const auto rows = run_altitude_sweep(cfgs, 400000, 3, 2);
  CHECK(rows[0].empirical_exponent == 1.0);
  CHECK(rows[0].target_exponent == 1.0);
  CHECK(rows[2].psi < rows[1].psi);
  CHECK(rows[2].measured.eps.mean < rows[1].measured.eps.mean);
  CHECK(rows[2].measured.eps_tilde.mean < rows[1].measured.eps_tilde.mean);
  for (const auto &r : rows) {
    CHECK(r.bound_holds);
  }
  CHECK_FALSE(rows[2].bound.vacuous);
  std::vector<AltitudeConfig> bad{{Eigen::Vector2d(-1, 1), Eigen::Vector2d(62.5, 37.5), 0.5}};
  CHECK_THROWS_AS(run_altitude_sweep(bad, 100, 1), InvalidArgument);
}
