#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "droplab/io.hpp"
#include "droplab/topic_model.hpp"

namespace droplab {

struct VerifyOptions {
  std::uint64_t seed = 0;
  /// Monte Carlo draws per configuration.
  std::int64_t mc = 1'000'000;
  int threads = 1;
};

/// Suite names accepted by run_verify_suite ("all" runs every one).
const std::vector<std::string> &verify_suites();

/// Runs one theory suite and returns {"suite", ..., "passed"}. Unknown
/// names throw InvalidArgument.
Json run_verify_suite(const std::string &suite, const VerifyOptions &opts);

/// Configurations shared with the tests.
struct BerryEsseenCase {
  Eigen::VectorXd w;
  Eigen::VectorXd intensity;
};
std::vector<BerryEsseenCase> berry_esseen_cases();

/// Equal-length discrete models (2 to 3 topics) for the posterior check.
std::vector<TopicModel> equal_length_models();

/// Two disjoint two-word blocks with total intensity `lambda` per topic;
/// topic 0 is class 0, topic 1 is class 1.
TopicModel orthogonal_topic_model(double lambda);

} // namespace droplab
