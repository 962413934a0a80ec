#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "droplab/topic_model.hpp"

namespace testing {

inline droplab::Topic make_topic(int id, double rho0, double rho1,
                                 std::vector<double> intensity) {
  droplab::Topic t;
  t.id = id;
  t.rho0 = rho0;
  t.rho1 = rho1;
  t.intensity = Eigen::Map<Eigen::VectorXd>(intensity.data(),
                                            static_cast<Eigen::Index>(intensity.size()));
  return t;
}

/// One pure topic per class.
inline droplab::TopicModel two_topic(std::vector<double> lambda0,
                                     std::vector<double> lambda1, double prior = 0.5) {
  const int d = static_cast<int>(lambda0.size());
  return droplab::TopicModel(prior, d,
                             {make_topic(0, 1, 0, std::move(lambda0)),
                              make_topic(1, 0, 1, std::move(lambda1))});
}

/// Standard error of a proportion estimate.
inline double prop_se(double p, double n) { return std::sqrt(p * (1 - p) / n); }

} // namespace testing
