#include "droplab/dropout.hpp"

#include "droplab/errors.hpp"

namespace droplab {

void DropoutConfig::validate() const {
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw InvalidArgument("dropout delta must lie in [0, 1], got " +
                          std::to_string(delta));
  }
  if (mc_replicates < 1) {
    throw InvalidArgument("mc_replicates must be >= 1");
  }
}

TopicModel thinned_model(const TopicModel &model, double delta) {
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw InvalidArgument("dropout delta must lie in [0, 1]");
  }
  if (delta == 0.0) {
    return model;
  }
  if (delta == 1.0) {
    throw InvalidArgument("delta = 1 thins every document to zero; the "
                          "thinned model is degenerate");
  }
  return model.scaled(1.0 - delta);
}

double dropout_posterior(const TopicModel &model, double delta,
                         const Eigen::Ref<const Eigen::VectorXi> &v) {
  if (delta == 0.0) {
    return bayes_posterior(model, v);
  }
  if (delta == 1.0) {
    // Every thinned document is empty; the posterior is the prior.
    if ((v.array() != 0).any()) {
      throw UndefinedPosterior("non-empty v has probability zero at delta = 1");
    }
    return model.label_prior();
  }
  return bayes_posterior(thinned_model(model, delta), v);
}

} // namespace droplab
