#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "droplab/errors.hpp"
#include "droplab/random.hpp"
#include "droplab/stats.hpp"
#include "droplab/topic_model.hpp"
#include "helpers.hpp"

using namespace droplab;
using testing::make_topic;
using testing::two_topic;

TEST_CASE("model validation") {
  CHECK_THROWS_AS(TopicModel(0.5, 2, {make_topic(0, 0.5, 1, {1, 1})}), InvalidArgument);
  CHECK_THROWS_AS(two_topic({1, -1}, {1, 1}), InvalidArgument);
  CHECK_THROWS_AS(two_topic({1, 1}, {1, 1}, 1.5), InvalidArgument);
  CHECK_THROWS_AS(two_topic({0, 0}, {1, 1}), InvalidArgument);
  CHECK_THROWS_AS(TopicModel(0.5, 3, {make_topic(0, 1, 1, {1, 1})}), InvalidArgument);
  CHECK_NOTHROW(two_topic({1, 0}, {0, 1}));
}

TEST_CASE("zero intensity yields zero counts") {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    CHECK(sample_counts(Eigen::Vector3d::Zero(), rng).isZero());
  }
}

TEST_CASE("poisson mean of a single-word topic") {
  const GenerativeSampler s(TopicModel(0.5, 1, {make_topic(0, 1, 1, {10})}));
  Rng rng(2);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    sum += sample_document(s, rng).counts[0];
  }
  CHECK(std::fabs(sum / n - 10.0) <= 3.0 * std::sqrt(10.0 / n));
}

TEST_CASE("degenerate rho makes topic equal label") {
  const GenerativeSampler s(two_topic({3, 1}, {1, 3}));
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const Document d = sample_document(s, rng);
    CHECK(d.topic_id == d.label);
    CHECK(d.length == d.counts.sum());
  }
}

TEST_CASE("multinomial sampler") {
  SUBCASE("zero-probability word stays empty") {
    const GenerativeSampler s(TopicModel(0.5, 2, {make_topic(0, 1, 1, {0, 5})}));
    Rng rng(4);
    for (int i = 0; i < 1000; ++i) {
      CHECK(sample_document_multinomial(s, rng).counts[0] == 0);
    }
  }
  SUBCASE("agrees with independent Poisson sampling") {
    const GenerativeSampler s(TopicModel(0.5, 2, {make_topic(0, 1, 1, {2, 3})}));
    Rng ra(5), rb(6);
    std::map<std::pair<int, int>, std::int64_t> a, b;
    const auto key = [](const Document &d) {
      // cells with total > 12 share one overflow key
      return d.counts.sum() > 12 ? std::make_pair(-1, -1)
                                 : std::make_pair(d.counts[0], d.counts[1]);
    };
    for (int i = 0; i < 100000; ++i) {
      a[key(sample_document(s, ra))]++;
      b[key(sample_document_multinomial(s, rb))]++;
    }
    CHECK(chi_square_two_sample(a, b).p_value > 1e-3);
  }
  SUBCASE("length is Poisson of the total intensity") {
    const GenerativeSampler s(TopicModel(0.5, 3, {make_topic(0, 1, 1, {1, 1, 1})}));
    Rng rng(7);
    std::vector<std::int64_t> len(100000);
    for (auto &l : len) {
      l = sample_document_multinomial(s, rng).length;
    }
    CHECK(chi_square_gof(len, [](std::int64_t k) { return poisson_pmf(k, 3.0); }).p_value > 1e-3);
  }
}

TEST_CASE("bayes posterior") {
  const TopicModel m = two_topic({1}, {2});
  const Eigen::VectorXi zero = Eigen::VectorXi::Zero(1);
  CHECK(bayes_posterior(m, zero) == doctest::Approx(0.26894142136999512075).epsilon(1e-13));

  SUBCASE("symmetric model and symmetric v give one half") {
    const TopicModel sym = two_topic({3, 1}, {1, 3});
    CHECK(bayes_posterior(sym, Eigen::Vector2i(2, 2)) == 0.5);
  }
  SUBCASE("identical classes return the prior") {
    const TopicModel same = two_topic({2, 5}, {2, 5}, 0.3);
    for (const Eigen::Vector2i &v : {Eigen::Vector2i(0, 0), Eigen::Vector2i(4, 1)}) {
      CHECK(bayes_posterior(same, v) == doctest::Approx(0.3).epsilon(1e-14));
    }
  }
  SUBCASE("label swap complements the posterior") {
    const TopicModel mixed(0.35, 3,
                           {make_topic(0, 0.7, 0.1, {1, 2, 3}),
                            make_topic(1, 0.3, 0.9, {4, 0.5, 1})});
    const TopicModel swapped = mixed.label_swapped();
    for_each_count_vector(3, 6, [&](const Eigen::VectorXi &v) {
      CHECK(std::fabs(bayes_posterior(mixed, v) + bayes_posterior(swapped, v) - 1.0) <= 1e-12);
    });
  }
  SUBCASE("long documents do not overflow") {
    const TopicModel big = two_topic({6000, 4000}, {4000, 6000});
    const double p = bayes_posterior(big, Eigen::Vector2i(5000, 5000));
    CHECK(p == doctest::Approx(0.5));
    const double q = bayes_posterior(big, Eigen::Vector2i(4100, 5900));
    CHECK(std::isfinite(q));
    CHECK(q > 0.99);
  }
  SUBCASE("impossible v throws") {
    const TopicModel sparse = two_topic({1, 0}, {1, 0});
    CHECK_THROWS_AS(bayes_posterior(sparse, Eigen::Vector2i(0, 1)), UndefinedPosterior);
  }
}

TEST_CASE("bayes error") {
  SUBCASE("uninformative features") {
    const TopicModel m = two_topic({1.5, 0.5}, {1.5, 0.5});
    const auto r = bayes_error(m, 8);
    CHECK(r.truncation_mass > 0.0);
    CHECK(r.error == doctest::Approx(0.5 * (1.0 - r.truncation_mass)).epsilon(1e-12));
  }
  SUBCASE("single class") {
    const TopicModel m = two_topic({1}, {2}, 1.0);
    CHECK(bayes_error(m).error == 0.0);
  }
  SUBCASE("matches Monte Carlo Bayes-rule classification") {
    const TopicModel m = two_topic({1}, {2});
    const auto r = bayes_error(m, 30);
    CHECK(r.truncation_mass < 1e-15);
    const GenerativeSampler s(m);
    Rng rng(8);
    const int n = 1000000;
    std::int64_t wrong = 0;
    for (int i = 0; i < n; ++i) {
      const Document d = sample_document(s, rng);
      const int pred = bayes_posterior(m, d.counts) > 0.5 ? 1 : 0;
      wrong += pred != d.label;
    }
    const double mc = static_cast<double>(wrong) / n;
    CHECK(std::fabs(mc - r.error) <= 3.0 * testing::prop_se(r.error, n));
  }
  SUBCASE("enumeration budget") {
    const TopicModel m = two_topic(std::vector<double>(30, 1.0), std::vector<double>(30, 2.0));
    CHECK_THROWS_AS(bayes_error(m, 40, 1000), EnumerationTooLarge);
  }
  CHECK(default_truncation(two_topic({50, 50}, {20, 30})) ==
        static_cast<int>(std::ceil(100 + 10 * std::sqrt(100.0))));
  CHECK(count_cells(2, 3) == 10);
  CHECK(count_cells(3, 6) == 84);
}

TEST_CASE("scaled and swapped models") {
  const TopicModel m = two_topic({4, 2}, {1, 1}, 0.2);
  const TopicModel s = m.scaled(0.25);
  CHECK(s.topic(0).intensity.isApprox(Eigen::Vector2d(1.0, 0.5)));
  const TopicModel w = m.label_swapped();
  CHECK(w.label_prior() == doctest::Approx(0.8));
  CHECK(w.topic(0).rho1 == 1.0);
  CHECK(m.topic_prob(0) == doctest::Approx(0.8));
  CHECK(m.label1_given_topic(1) == doctest::Approx(1.0));
}

TEST_CASE("synthetic block model") {
  const SyntheticParams p;
  const GenerativeSampler s = build_synthetic_model(p);
  CHECK(s.vocab_size() == 500);
  CHECK_FALSE(s.is_discrete());
  CHECK_THROWS_AS(s.discrete(), InvalidArgument);

  const Eigen::VectorXd l0 = synthetic_intensity(p, 0, 0.0);
  CHECK(l0.sum() == doctest::Approx(1000.0).epsilon(1e-12));
  for (int j = 1; j < 7; ++j) {
    CHECK(l0[j] == l0[0]);
  }
  CHECK(l0[0] / l0[14] == doctest::Approx(std::exp(1.0)).epsilon(1e-13));
  CHECK(l0[7] == l0[14]);

  Rng rng(10);
  std::int64_t ones = 0;
  const int n = 100000;
  double tau_sum = 0.0;
  std::int64_t tau_n = 0;
  for (int i = 0; i < n; ++i) {
    const int y = s.draw_label(rng);
    ones += y;
    const TopicDraw t = s.draw_topic(y, rng);
    if (i < 2000) {
      CHECK(std::fabs(t.intensity.sum() - 1000.0) <= 1e-9);
      const double tail = t.intensity[14];
      CHECK((t.intensity.tail(486).array() == tail).all());
    }
    if (y == 1) {
      tau_sum += t.value;
      ++tau_n;
    }
  }
  CHECK(std::fabs(static_cast<double>(ones) / n - 0.5) <= 3.0 * std::sqrt(0.25 / n));
  // Exp(3) read as rate 3.
  CHECK(std::fabs(tau_sum / tau_n - 1.0 / 3.0) <= 4.0 * (1.0 / 3.0) / std::sqrt(tau_n));

  CHECK_NOTHROW(preset_sampler("synthetic-sec6", {{"exp_rate", 2.0}}));
  CHECK_THROWS_AS(preset_sampler("nope"), InvalidArgument);
}
