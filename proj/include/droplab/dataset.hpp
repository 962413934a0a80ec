#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "droplab/topic_model.hpp"

namespace droplab {

using CountMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Row-major sparse design: one row of word counts per example. Topic ids
/// are -1 when unknown (real corpora).
struct Dataset {
  CountMatrix counts;
  Eigen::VectorXi labels;
  Eigen::VectorXi topics;

  Eigen::Index size() const { return counts.rows(); }
  Eigen::Index dims() const { return counts.cols(); }
  Eigen::Index count_label(int label) const {
    return (labels.array() == label).count();
  }

  static Dataset from_documents(std::span<const Document> docs, int vocab_size);
  /// Rows of `other` appended after the rows of *this.
  Dataset concatenated(const Dataset &other) const;
};

/// n documents drawn from `sampler`, the i-th from stream (seed, i).
std::vector<Document> sample_documents(const GenerativeSampler &sampler,
                                       std::size_t n, std::uint64_t seed);

} // namespace droplab
