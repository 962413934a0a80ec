#include "droplab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "droplab/dataset.hpp"
#include "droplab/dropout.hpp"
#include "droplab/parallel.hpp"

namespace droplab {

namespace {

constexpr std::uint64_t kTrainTag = 0x747261696eULL;
constexpr std::uint64_t kTestTag = 0x74657374ULL;
constexpr std::int64_t kTestChunk = 2000;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

void CurveSpec::validate() const {
  if (n_grid.empty() || delta_grid.empty()) {
    throw InvalidArgument("curve grids must be non-empty");
  }
  if (trials < 1) {
    throw InvalidArgument("trials must be >= 1");
  }
  if (test_size < 1) {
    throw InvalidArgument("test_size must be >= 1");
  }
  for (int n : n_grid) {
    if (n < 2) {
      throw InvalidArgument("training sizes must be >= 2");
    }
  }
  for (double d : delta_grid) {
    if (!(d >= 0.0 && d <= 1.0)) {
      throw InvalidArgument("delta values must lie in [0, 1]");
    }
  }
  train_cfg.validate();
}

std::vector<CurveCell> CurveResult::summary() const {
  std::vector<CurveCell> cells;
  std::map<std::pair<int, double>, std::size_t> index;
  std::vector<std::vector<double>> test;
  std::vector<std::vector<double>> train;
  for (const auto &r : records) {
    const auto key = std::make_pair(r.n, r.delta);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, cells.size()).first;
      cells.push_back({r.n, r.delta, 0, {}, {}});
      test.emplace_back();
      train.emplace_back();
    }
    if (!r.failure.empty()) {
      continue;
    }
    test[it->second].push_back(r.test_error);
    train[it->second].push_back(r.train_error);
  }
  auto estimate = [](const std::vector<double> &xs) {
    Estimate e;
    if (xs.empty()) {
      e.mean = std::numeric_limits<double>::quiet_NaN();
      return e;
    }
    double sum = 0.0;
    for (double x : xs) {
      sum += x;
    }
    e.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
      double ss = 0.0;
      for (double x : xs) {
        ss += (x - e.mean) * (x - e.mean);
      }
      e.se = std::sqrt(ss / static_cast<double>(xs.size() - 1) /
                       static_cast<double>(xs.size()));
    }
    return e;
  };
  for (std::size_t i = 0; i < cells.size(); ++i) {
    cells[i].count = test[i].size();
    cells[i].test_error = estimate(test[i]);
    cells[i].train_error = estimate(train[i]);
  }
  return cells;
}

std::uint64_t cell_seed(std::uint64_t master, int n, std::size_t delta_index,
                        int trial) {
  return derive_seed(master, {static_cast<std::uint64_t>(n), delta_index,
                              static_cast<std::uint64_t>(trial)});
}

CurveResult run_learning_curves(const CurveSpec &spec, int threads) {
  spec.validate();
  const int d = spec.sampler.vocab_size();
  const std::size_t per_trial = spec.n_grid.size() * spec.delta_grid.size();
  const std::size_t total = per_trial * static_cast<std::size_t>(spec.trials);

  CurveResult result;
  result.records.resize(total);
  std::vector<LinearClassifier> fitted(total);

  parallel_for(total, threads, [&](std::size_t cell) {
    const int trial = static_cast<int>(cell / per_trial);
    const std::size_t within = cell % per_trial;
    const std::size_t n_index = within / spec.delta_grid.size();
    const std::size_t delta_index = within % spec.delta_grid.size();
    CurveRecord &rec = result.records[cell];
    rec.n = spec.n_grid[n_index];
    rec.delta = spec.delta_grid[delta_index];
    rec.trial = trial;
    rec.seed = cell_seed(spec.master_seed, rec.n, delta_index, trial);

    const auto start = std::chrono::steady_clock::now();
    try {
      const auto docs = sample_documents(spec.sampler,
                                         static_cast<std::size_t>(rec.n),
                                         derive_seed(rec.seed, {kTrainTag}));
      const Dataset train = Dataset::from_documents(docs, d);
      LinearClassifier clf;
      if (rec.delta == 1.0) {
        clf = train_naive_bayes(train, spec.nb_smoothing);
      } else {
        TrainConfig cfg = spec.train_cfg;
        cfg.dropout.delta = rec.delta;
        cfg.seed = rec.seed;
        clf = train_logistic_dropout(train, cfg);
      }
      clf = recalibrate_intercept(clf, train);
      rec.train_error = evaluate_error(clf, train).error;
      fitted[cell] = std::move(clf);
    } catch (const std::exception &e) {
      rec.failure = e.what();
      rec.train_error = std::numeric_limits<double>::quiet_NaN();
    }
    const auto stop = std::chrono::steady_clock::now();
    rec.wall_time_ms =
        spec.record_time
            ? std::chrono::duration<double, std::milli>(stop - start).count()
            : 0.0;
  });

  // Shared per-trial test set, streamed in chunks; each chunk scores every
  // classifier of its trial. Mistake counts are integers, so the reduction
  // is exact in any order.
  const auto chunks = static_cast<std::size_t>(
      (spec.test_size + kTestChunk - 1) / kTestChunk);
  std::vector<std::vector<std::int64_t>> mistakes(
      static_cast<std::size_t>(spec.trials) * chunks,
      std::vector<std::int64_t>(per_trial, 0));
  parallel_for(mistakes.size(), threads, [&](std::size_t job) {
    const auto trial = job / chunks;
    const auto chunk = job % chunks;
    const std::int64_t begin = static_cast<std::int64_t>(chunk) * kTestChunk;
    const std::int64_t len = std::min(kTestChunk, spec.test_size - begin);
    Rng rng = Rng::stream(spec.master_seed, {kTestTag, trial, chunk});
    std::vector<Document> docs;
    docs.reserve(static_cast<std::size_t>(len));
    for (std::int64_t k = 0; k < len; ++k) {
      docs.push_back(sample_document(spec.sampler, rng));
    }
    const Dataset test = Dataset::from_documents(docs, d);
    for (std::size_t c = 0; c < per_trial; ++c) {
      const std::size_t cell = trial * per_trial + c;
      if (!result.records[cell].failure.empty()) {
        continue;
      }
      const Eigen::VectorXd s = fitted[cell].scores(test.counts);
      std::int64_t wrong = 0;
      for (Eigen::Index i = 0; i < s.size(); ++i) {
        wrong += (s[i] > 0.0 ? 1 : 0) != test.labels[i];
      }
      mistakes[job][c] = wrong;
    }
  });
  for (std::size_t cell = 0; cell < total; ++cell) {
    CurveRecord &rec = result.records[cell];
    if (!rec.failure.empty()) {
      rec.test_error = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const std::size_t trial = cell / per_trial;
    std::int64_t wrong = 0;
    for (std::size_t chunk = 0; chunk < chunks; ++chunk) {
      wrong += mistakes[trial * chunks + chunk][cell % per_trial];
    }
    rec.test_error = static_cast<double>(wrong) /
                     static_cast<double>(spec.test_size);
  }
  return result;
}

std::string curves_csv(const CurveResult &result,
                       const std::string &provenance) {
  std::ostringstream out;
  if (!provenance.empty()) {
    out << "# " << provenance << '\n';
  }
  out << "n,delta,trial,test_error,train_error,wall_time_ms,seed\n";
  for (const auto &r : result.records) {
    out << r.n << ',' << format_double(r.delta) << ',' << r.trial << ','
        << format_double(r.test_error) << ',' << format_double(r.train_error)
        << ',' << format_double(r.wall_time_ms) << ',' << r.seed << '\n';
  }
  return out.str();
}

// -- influence demo ----------------------------------------------------------

TopicModel InfluenceConfig::model() const {
  auto topic = [&](int id, double rho0, double rho1, double share) {
    Topic t;
    t.id = id;
    t.rho0 = rho0;
    t.rho1 = rho1;
    t.intensity = Eigen::Vector2d(share, 1.0 - share) * doc_length;
    return t;
  };
  return TopicModel(0.5, 2,
                    {topic(0, 1.0, 0.0, blue_word1),
                     topic(1, 0.0, 1.0 - rare_fraction, common_red_word1),
                     topic(2, 0.0, rare_fraction, rare_red_word1)});
}

namespace {

ClusterErrors cluster_errors(const LinearClassifier &clf, const Dataset &data) {
  const auto report = evaluate_error(clf, data);
  auto rate = [&](int topic) {
    auto it = report.per_topic.find(topic);
    return it == report.per_topic.end() ? 0.0 : it->second.mean;
  };
  return {rate(0), rate(1), rate(2)};
}

} // namespace

InfluenceReport run_influence_demo(const InfluenceConfig &cfg) {
  const TopicModel model = cfg.model();
  const GenerativeSampler sampler(model);
  const auto docs = sample_documents(sampler, static_cast<std::size_t>(cfg.n),
                                     derive_seed(cfg.seed, {kTrainTag}));
  const Dataset train = Dataset::from_documents(docs, 2);

  InfluenceReport r;
  TrainConfig plain_cfg = cfg.train;
  plain_cfg.seed = cfg.seed;
  r.plain = train_logistic(train, plain_cfg);
  TrainConfig drop_cfg = plain_cfg;
  drop_cfg.dropout.delta = cfg.delta;
  r.dropout = train_logistic_dropout(train, drop_cfg);

  const double denom = r.plain.weights.norm() * r.dropout.weights.norm();
  const double cosine =
      denom > 0.0 ? std::clamp(r.plain.weights.dot(r.dropout.weights) / denom,
                               -1.0, 1.0)
                  : 1.0;
  r.normal_angle_deg = std::acos(cosine) * 180.0 / M_PI;

  const auto test_docs = sample_documents(sampler, static_cast<std::size_t>(cfg.n),
                                          derive_seed(cfg.seed, {kTestTag}));
  const Dataset test = Dataset::from_documents(test_docs, 2);
  r.plain_errors = cluster_errors(r.plain, test);
  r.dropout_errors = cluster_errors(r.dropout, test);

  if (cfg.delta > 0.0 && cfg.delta < 1.0) {
    const double deltas[] = {cfg.delta};
    const auto bias = run_bias_check(model, deltas, 30);
    r.posterior_field_gap = bias.rows.front().max_gap;
  }
  return r;
}

// -- Bayes-boundary preservation ------------------------------------------

TopicModel unequal_length_control() {
  Topic t0;
  t0.id = 0;
  t0.rho0 = 1.0;
  t0.intensity = Eigen::VectorXd::Constant(1, 1.0);
  Topic t1;
  t1.id = 1;
  t1.rho1 = 1.0;
  t1.intensity = Eigen::VectorXd::Constant(1, 2.0);
  return TopicModel(0.5, 1, {t0, t1});
}

namespace {

std::vector<BiasRow> posterior_gaps(const TopicModel &model,
                                    std::span<const double> delta_grid,
                                    int v_budget) {
  std::vector<BiasRow> rows;
  for (double delta : delta_grid) {
    BiasRow row;
    row.delta = delta;
    row.worst_v = Eigen::VectorXi::Zero(model.vocab_size());
    for_each_count_vector(model.vocab_size(), v_budget,
                          [&](const Eigen::VectorXi &v) {
                            double gap = 0.0;
                            try {
                              gap = std::fabs(dropout_posterior(model, delta, v) -
                                              bayes_posterior(model, v));
                            } catch (const UndefinedPosterior &) {
                              return; // v impossible under the model
                            }
                            if (gap > row.max_gap) {
                              row.max_gap = gap;
                              row.worst_v = v;
                            }
                          });
    rows.push_back(row);
  }
  return rows;
}

} // namespace

BiasReport run_bias_check(const TopicModel &model,
                          std::span<const double> delta_grid, int v_budget) {
  BiasReport r;
  const double len0 = model.topic(0).doc_length();
  r.equal_length = true;
  for (const auto &t : model.topics()) {
    r.equal_length = r.equal_length &&
                     std::fabs(t.doc_length() - len0) <= 1e-12 * len0;
  }
  r.rows = posterior_gaps(model, delta_grid, v_budget);
  r.control_rows = posterior_gaps(unequal_length_control(), delta_grid, v_budget);
  if (r.equal_length) {
    r.passed = true;
    for (const auto &row : r.rows) {
      r.passed = r.passed && row.max_gap <= 1e-10;
    }
  } else {
    r.passed = false;
    for (const auto &row : r.rows) {
      r.passed = r.passed || row.max_gap > 0.0;
    }
  }
  return r;
}

// -- altitude sweep ------------------------------------------------------------

std::vector<AltitudeRow> run_altitude_sweep(std::span<const AltitudeConfig> configs,
                                            std::int64_t mc_budget,
                                            std::uint64_t seed, int threads) {
  std::vector<AltitudeRow> rows;
  std::uint64_t index = 0;
  for (const auto &cfg : configs) {
    AltitudeRow row;
    row.config = cfg;
    row.moments = score_moments(cfg.weights, cfg.intensity);
    if (!(row.moments.mu > 0.0)) {
      throw InvalidArgument("altitude sweep configs need a positive score mean");
    }
    row.psi = psi(cfg.weights, cfg.intensity);
    row.gaussian = gaussian_error_estimate(cfg.weights, cfg.intensity, cfg.delta);
    const LinearClassifier clf{cfg.weights, 0.0};
    row.measured = estimate_topic_errors(clf, cfg.intensity, 1, cfg.delta,
                                         mc_budget, derive_seed(seed, {index++}),
                                         threads);
    row.bound = altitude_bound_rhs(row.measured.eps_tilde.mean, row.psi, cfg.delta);
    row.bound_holds = row.bound.vacuous || row.measured.eps.mean <= row.bound.rhs;
    row.target_exponent = 1.0 / (1.0 - cfg.delta);
    row.empirical_exponent =
        std::log(row.measured.eps.mean) / std::log(row.measured.eps_tilde.mean);
    rows.push_back(row);
  }
  return rows;
}

} // namespace droplab
