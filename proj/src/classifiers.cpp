#include "droplab/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "droplab/errors.hpp"

namespace droplab {

void TrainConfig::validate() const {
  if (!(l2_weight >= 0.0)) {
    throw InvalidArgument("l2_weight must be >= 0");
  }
  if (epochs < 1) {
    throw InvalidArgument("epochs must be >= 1");
  }
  if (!(step_size >= 0.0)) {
    throw InvalidArgument("step_size must be >= 0 (0 selects it automatically)");
  }
  if (optimizer == Optimizer::MiniBatch && batch_size < 1) {
    throw InvalidArgument("batch_size must be >= 1");
  }
  dropout.validate();
}

namespace {

void require_both_classes(const Dataset &data) {
  if (data.size() == 0) {
    throw EmptyData("training data is empty");
  }
  if (data.count_label(0) == 0 || data.count_label(1) == 0) {
    throw DegenerateData("training data must contain both classes");
  }
}

double sigmoid(double u) {
  if (u >= 0.0) {
    return 1.0 / (1.0 + std::exp(-u));
  }
  const double e = std::exp(u);
  return e / (1.0 + e);
}

/// Affine reparameterization z = (x~ - center) / scale with unit expected
/// second moment per column under the dropout measure.
struct Preconditioner {
  Eigen::VectorXd center;
  Eigen::VectorXd scale;
  Eigen::VectorXd noise_diag; // E[Var(x~_j | x_j)] summed over rows, over scale^2
};

Preconditioner make_preconditioner(const Dataset &data, double keep,
                                   bool centered) {
  const Eigen::Index d = data.dims();
  const double n = static_cast<double>(data.size());
  Eigen::VectorXd colsum = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd colsq = Eigen::VectorXd::Zero(d);
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (CountMatrix::InnerIterator it(data.counts, i); it; ++it) {
      colsum[it.col()] += it.value();
      colsq[it.col()] += it.value() * it.value();
    }
  }
  Preconditioner p;
  p.center = centered ? Eigen::VectorXd(keep * colsum / n)
                      : Eigen::VectorXd::Zero(d);
  const Eigen::ArrayXd c = p.center.array();
  const Eigen::ArrayXd second =
      (keep * keep * colsq.array() - 2.0 * keep * c * colsum.array() +
       n * c * c + keep * (1.0 - keep) * colsum.array()) /
      n;
  p.scale = (second > 1e-300).select(second.sqrt(), 1.0).matrix();
  p.noise_diag = (keep * (1.0 - keep) * colsum.array() /
                  p.scale.array().square())
                     .matrix();
  return p;
}

/// Largest eigenvalue of the expected Gram matrix of [z, 1] / n, by power
/// iteration.
double gram_spectral_bound(const Dataset &data, const Preconditioner &pre,
                           double keep, bool with_intercept) {
  const Eigen::Index d = data.dims();
  const double n = static_cast<double>(data.size());
  const Eigen::Index dim = d + (with_intercept ? 1 : 0);
  Rng rng(0x5eed);
  Eigen::VectorXd v(dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    v[j] = 0.5 + rng.uniform();
  }
  v.normalize();
  double eig = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    const Eigen::VectorXd vt = v.head(d).cwiseQuotient(pre.scale);
    Eigen::VectorXd u = keep * (data.counts * vt);
    u.array() -= pre.center.dot(vt);
    if (with_intercept) {
      u.array() += v[d];
    }
    Eigen::VectorXd out(dim);
    Eigen::VectorXd xt = keep * (data.counts.transpose() * u);
    xt -= pre.center * u.sum();
    out.head(d) = xt.cwiseQuotient(pre.scale) +
                  pre.noise_diag.cwiseProduct(v.head(d));
    if (with_intercept) {
      out[d] = u.sum();
    }
    out /= n;
    const double next = out.norm();
    if (next == 0.0) {
      return 0.0;
    }
    v = out / next;
    if (std::fabs(next - eig) <= 1e-10 * next) {
      eig = next;
      break;
    }
    eig = next;
  }
  return eig;
}

LinearClassifier train_impl(const Dataset &data, const TrainConfig &cfg,
                            double delta) {
  cfg.validate();
  require_both_classes(data);
  const Eigen::Index d = data.dims();
  const double keep = 1.0 - delta;
  const bool noisy = delta > 0.0;
  const int replicates = noisy ? cfg.dropout.mc_replicates : 1;

  const Preconditioner pre = make_preconditioner(data, keep, cfg.fit_intercept);
  const Eigen::VectorXd inv_scale_sq = pre.scale.array().square().inverse();
  double step = cfg.step_size;
  if (step == 0.0) {
    const double curvature =
        0.25 * gram_spectral_bound(data, pre, keep, cfg.fit_intercept) +
        cfg.l2_weight * inv_scale_sq.maxCoeff();
    step = curvature > 0.0 ? 1.0 / curvature : 1.0;
  }

  Rng rng = Rng::stream(cfg.seed, {0x7261696eULL});
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
  double beta = 0.0;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const std::size_t batch =
      cfg.optimizer == Optimizer::MiniBatch
          ? std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), order.size())
          : order.size();

  std::vector<std::pair<Eigen::Index, double>> row;
  Eigen::VectorXd gx(d);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.optimizer == Optimizer::MiniBatch) {
      for (std::size_t i = order.size(); i > 1; --i) {
        const auto k = static_cast<std::size_t>(rng.next_u64() % i);
        std::swap(order[i - 1], order[k]);
      }
    }
    bool converged = false;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      const Eigen::VectorXd w = theta.cwiseProduct(pre.scale.cwiseInverse());
      const double offset = beta - pre.center.dot(w);
      gx.setZero();
      double rsum = 0.0;
      for (int rep = 0; rep < replicates; ++rep) {
        for (std::size_t pos = start; pos < stop; ++pos) {
          const Eigen::Index i = order[pos];
          row.clear();
          double u = offset;
          for (CountMatrix::InnerIterator it(data.counts, i); it; ++it) {
            const double v =
                noisy ? static_cast<double>(binomial(
                            rng, static_cast<std::int64_t>(it.value()), keep))
                      : it.value();
            row.emplace_back(it.col(), v);
            u += v * w[it.col()];
          }
          const double r = sigmoid(u) - static_cast<double>(data.labels[i]);
          for (const auto &[j, v] : row) {
            gx[j] += v * r;
          }
          rsum += r;
        }
      }
      const double count = static_cast<double>(replicates) *
                           static_cast<double>(stop - start);
      Eigen::VectorXd grad =
          (gx - pre.center * rsum).cwiseQuotient(pre.scale) / count +
          cfg.l2_weight * theta.cwiseProduct(inv_scale_sq);
      const double grad_beta = cfg.fit_intercept ? rsum / count : 0.0;
      if (!noisy && cfg.optimizer == Optimizer::FullBatch &&
          std::sqrt(grad.squaredNorm() + grad_beta * grad_beta) <
              cfg.tolerance) {
        converged = true;
        break;
      }
      theta -= step * grad;
      beta -= step * grad_beta;
    }
    if (converged) {
      break;
    }
  }

  LinearClassifier clf;
  clf.weights = theta.cwiseQuotient(pre.scale);
  clf.intercept = cfg.fit_intercept ? beta - pre.center.dot(clf.weights) : 0.0;
  return clf;
}

} // namespace

LinearClassifier train_logistic(const Dataset &data, const TrainConfig &cfg) {
  return train_impl(data, cfg, 0.0);
}

LinearClassifier train_logistic_dropout(const Dataset &data,
                                        const TrainConfig &cfg) {
  return train_impl(data, cfg, cfg.dropout.delta);
}

LinearClassifier train_naive_bayes(const Dataset &data, double smoothing) {
  require_both_classes(data);
  if (!(smoothing > 0.0)) {
    throw InvalidArgument("smoothing must be > 0");
  }
  const Eigen::Index d = data.dims();
  Eigen::VectorXd n0 = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd n1 = Eigen::VectorXd::Zero(d);
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    Eigen::VectorXd &target = data.labels[i] == 1 ? n1 : n0;
    for (CountMatrix::InnerIterator it(data.counts, i); it; ++it) {
      target[it.col()] += it.value();
    }
  }
  const double ds = static_cast<double>(d) * smoothing;
  const Eigen::ArrayXd p0 = (n0.array() + smoothing) / (n0.sum() + ds);
  const Eigen::ArrayXd p1 = (n1.array() + smoothing) / (n1.sum() + ds);
  LinearClassifier clf;
  clf.weights = (p1.log() - p0.log()).matrix();
  clf.intercept = std::log(static_cast<double>(data.count_label(1)) /
                           static_cast<double>(data.count_label(0)));
  return clf;
}

LinearClassifier recalibrate_intercept(const LinearClassifier &clf,
                                       const Dataset &data) {
  if (data.size() == 0) {
    throw EmptyData("cannot recalibrate on empty data");
  }
  const Eigen::VectorXd s = data.counts * clf.weights;
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(s.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::sort(idx.begin(), idx.end(),
            [&](Eigen::Index a, Eigen::Index b) { return s[a] < s[b]; });

  // Threshold t predicts 1 for scores > t; b = -t.
  std::int64_t errors = data.count_label(0); // t below every score
  const double lo = s[idx.front()];
  const double hi = s[idx.back()];
  double best_b = -(lo - 1.0);
  std::int64_t best_errors = errors;
  auto consider = [&](double b, std::int64_t e) {
    if (e < best_errors || (e == best_errors && std::fabs(b) < std::fabs(best_b))) {
      best_errors = e;
      best_b = b;
    }
  };
  std::size_t k = 0;
  while (k < idx.size()) {
    const double value = s[idx[k]];
    while (k < idx.size() && s[idx[k]] == value) {
      errors += data.labels[idx[k]] == 1 ? 1 : -1;
      ++k;
    }
    const double t = k < idx.size() ? 0.5 * (value + s[idx[k]]) : hi + 1.0;
    consider(-t, errors);
  }
  LinearClassifier out = clf;
  out.intercept = best_b;
  return out;
}

LinearClassifier erm_zero_one_small(const Dataset &data, int resolution) {
  const Eigen::Index d = data.dims();
  if (d > 3) {
    throw DimensionTooLarge("erm_zero_one_small supports d <= 3, got " +
                            std::to_string(d));
  }
  if (d < 1 || resolution < 1) {
    throw InvalidArgument("erm_zero_one_small needs d >= 1 and resolution >= 1");
  }
  if (data.size() == 0) {
    throw EmptyData("cannot fit on empty data");
  }
  std::vector<Eigen::VectorXd> directions;
  if (d == 1) {
    directions = {Eigen::VectorXd::Constant(1, 1.0),
                  Eigen::VectorXd::Constant(1, -1.0)};
  } else if (d == 2) {
    for (int k = 0; k < resolution; ++k) {
      const double a = 2.0 * M_PI * k / resolution;
      directions.push_back(Eigen::Vector2d(std::cos(a), std::sin(a)));
    }
  } else {
    const int rings = std::max(1, resolution / 2);
    for (int i = 0; i <= rings; ++i) {
      const double polar = M_PI * i / rings;
      const int around = (i == 0 || i == rings) ? 1 : resolution;
      for (int k = 0; k < around; ++k) {
        const double az = 2.0 * M_PI * k / resolution;
        directions.push_back(Eigen::Vector3d(std::sin(polar) * std::cos(az),
                                             std::sin(polar) * std::sin(az),
                                             std::cos(polar)));
      }
    }
  }
  LinearClassifier best;
  std::int64_t best_mistakes = -1;
  for (const auto &dir : directions) {
    LinearClassifier cand{dir, 0.0};
    cand = recalibrate_intercept(cand, data);
    const auto mistakes = evaluate_error(cand, data).mistakes;
    if (best_mistakes < 0 || mistakes < best_mistakes) {
      best = cand;
      best_mistakes = mistakes;
    }
  }
  return best;
}

namespace {

ErrorReport tally(const Eigen::VectorXd &scores, const Dataset &data) {
  ErrorReport report;
  std::map<int, std::pair<std::int64_t, std::int64_t>> topic_counts;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    const int pred = scores[i] > 0.0 ? 1 : 0;
    const bool wrong = pred != data.labels[i];
    report.mistakes += wrong ? 1 : 0;
    report.total += 1;
    const int topic = data.topics.size() ? data.topics[i] : -1;
    if (topic >= 0) {
      auto &tc = topic_counts[topic];
      tc.first += wrong ? 1 : 0;
      tc.second += 1;
    }
  }
  for (const auto &[topic, tc] : topic_counts) {
    report.per_topic[topic] = proportion(tc.first, tc.second);
  }
  report.error = static_cast<double>(report.mistakes) /
                 static_cast<double>(report.total);
  return report;
}

} // namespace

ErrorReport evaluate_error(const LinearClassifier &clf, const Dataset &data) {
  if (data.size() == 0) {
    throw EmptyData("cannot evaluate on empty data");
  }
  if (clf.weights.size() != data.dims()) {
    throw InvalidArgument("classifier width differs from data width");
  }
  return tally(clf.scores(data.counts), data);
}

ErrorReport evaluate_dropout_error(const LinearClassifier &clf,
                                   const Dataset &data, double delta,
                                   int replicates, Rng &rng) {
  if (data.size() == 0) {
    throw EmptyData("cannot evaluate on empty data");
  }
  if (replicates < 1) {
    throw InvalidArgument("replicates must be >= 1");
  }
  std::map<int, std::pair<std::int64_t, std::int64_t>> topic_counts;
  ErrorReport report;
  CountMatrix thinned = data.counts;
  for (int rep = 0; rep < replicates; ++rep) {
    std::copy(data.counts.valuePtr(),
              data.counts.valuePtr() + data.counts.nonZeros(),
              thinned.valuePtr());
    thin_in_place(thinned, delta, rng);
    const Eigen::VectorXd s = clf.scores(thinned);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const bool wrong = (s[i] > 0.0 ? 1 : 0) != data.labels[i];
      report.mistakes += wrong ? 1 : 0;
      report.total += 1;
      const int topic = data.topics.size() ? data.topics[i] : -1;
      if (topic >= 0) {
        auto &tc = topic_counts[topic];
        tc.first += wrong ? 1 : 0;
        tc.second += 1;
      }
    }
  }
  for (const auto &[topic, tc] : topic_counts) {
    report.per_topic[topic] = proportion(tc.first, tc.second);
  }
  report.error = static_cast<double>(report.mistakes) /
                 static_cast<double>(report.total);
  return report;
}

} // namespace droplab
