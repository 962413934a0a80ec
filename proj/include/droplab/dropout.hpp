#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "droplab/random.hpp"
#include "droplab/topic_model.hpp"

namespace droplab {

/// Binomial dropout settings. delta = 0 is the identity and delta = 1
/// deletes every word.
struct DropoutConfig {
  double delta = 0.0;
  int mc_replicates = 8;

  /// Throws InvalidArgument if delta is outside [0, 1] or
  /// mc_replicates < 1.
  void validate() const;
};

/// Each count x_j is replaced by a Binomial(x_j, 1 - delta) draw.
template <typename Derived>
Eigen::VectorXi thin_counts(const Eigen::MatrixBase<Derived> &x, double delta,
                            Rng &rng) {
  Eigen::VectorXi out(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    out[j] = static_cast<int>(binomial(rng, x[j], 1.0 - delta));
  }
  return out;
}

/// In-place thinning of the stored values of a sparse count matrix.
/// Values are visited in storage order, so the draw sequence is fixed by
/// the sparsity pattern.
template <typename Scalar, int Options>
void thin_in_place(Eigen::SparseMatrix<Scalar, Options> &counts, double delta,
                   Rng &rng) {
  Scalar *values = counts.valuePtr();
  const auto nnz = counts.nonZeros();
  for (Eigen::Index k = 0; k < nnz; ++k) {
    values[k] = static_cast<Scalar>(
        binomial(rng, static_cast<std::int64_t>(values[k]), 1.0 - delta));
  }
}

/// The law of thinned documents: every intensity multiplied by 1 - delta.
/// For delta = 1 the intensities would vanish, which is not a valid model;
/// that endpoint throws InvalidArgument.
TopicModel thinned_model(const TopicModel &model, double delta);

/// P(y = 1 | thinned x = v).
double dropout_posterior(const TopicModel &model, double delta,
                         const Eigen::Ref<const Eigen::VectorXi> &v);

} // namespace droplab
